#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "minv/maps.hpp"
#include "minv/measures.hpp"
#include "minv/solvers.hpp"

namespace minv {

struct FixtureOptions {
  std::uint64_t seed = 20240601;
  std::size_t samples = 4096;  ///< particle count N
  std::size_t grid = 200;      ///< parameter grid cells per axis
  std::size_t bins = 50;       ///< data bins for 1-D data
  double alpha = 1.0;          ///< regularization strength of the regularized fixtures
};

/// A worked example: forward map, data and the closed-form answer.
struct Fixture {
  std::string name;
  std::string description;
  ForwardMap map;
  Formulation formulation = Formulation::Conditional;
  std::optional<ParticleMeasure> particles;
  std::optional<GridMeasure> grid_data;
  std::optional<GridSpec> theta_grid;
  RegularizationConfig reg;
  /// Closed-form density of the reconstruction (data space for conditional
  /// reconstruction, parameter space for the grid formulations).
  std::function<double(const Vector&)> analytic_density;
  /// Closed-form pointwise map (F, 𝓗, F̃ or a matrix) applied to data points.
  std::function<Vector(const Vector&)> analytic_map;
  std::map<std::string, double> tolerance;
};

/// ½ uniform on the unit disc + ½ uniform on the radius-2 circle, seen through
/// the polar map. Particles: N/2 disc samples and N/2 equiangular circle
/// points. Grid: the same measure on cells of width 2/grid over [-2.1, 2.1]².
Fixture polar_overdetermined(const FixtureOptions& opts = {});

/// |x − (1,1)| on the unit ball around (1,1) with radial data μr on [0,1],
/// given as a density (bins and quantile particles) or as samples.
Fixture offset_polar_underdetermined(const std::function<double(double)>& mu_r_density,
                                     const FixtureOptions& opts = {});
Fixture offset_polar_underdetermined(const ParticleMeasure& mu_r, const FixtureOptions& opts = {});

/// Offset polar fixture with a Gaussian prior ∝ exp(−|x|²/2) restricted to Θ.
Fixture offset_polar_reg_kl(const FixtureOptions& opts = {});

/// Offset polar map on Θ = [0,2]² with the regularized Wasserstein answer.
Fixture offset_polar_reg_w2(const FixtureOptions& opts = {});

enum class LinearRegime { Over, Under };

/// Linear map on ℝ^cols. Over: full column rank, answer A†. Under: full row
/// rank, answer 𝓗 = A†. With alpha > 0 the answer is (AᵀA + αI)⁻¹Aᵀ.
Fixture linear_fixture(const Matrix& a, LinearRegime regime, ParticleMeasure data, double alpha = 0.0);

/// Stable identifiers accepted by make_fixture.
const std::vector<std::string>& fixture_names();

/// Builds a named fixture; throws InvalidArgument for an unknown name.
Fixture make_fixture(const std::string& name, const FixtureOptions& opts = {});

/// Deterministic samples: midpoint quantiles of a density on [0,1].
ParticleMeasure quantile_samples(const std::function<double(double)>& density, std::size_t n);

/// Gaussian particle cloud with the given dimension, stream name and scale.
ParticleMeasure gaussian_particles(std::size_t n, std::size_t dim, std::uint64_t seed, const std::string& stream,
                                   double scale = 1.0);

}  // namespace minv
