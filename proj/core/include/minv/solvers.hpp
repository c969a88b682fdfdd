#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "minv/argmin.hpp"
#include "minv/divergences.hpp"
#include "minv/maps.hpp"
#include "minv/measures.hpp"
#include "minv/transport.hpp"

namespace minv {

enum class Formulation { Conditional, Marginal, Entropy, Moment, RegEntropy, RegWasserstein };

std::string_view to_string(Formulation f);

using AnyMeasure = std::variant<ParticleMeasure, GridMeasure>;

struct SolveReport {
  AnyMeasure optimizer;
  AnyMeasure pushforward_of_optimizer;
  double objective = 0.0;
  Formulation method = Formulation::Conditional;
  /// How transport objectives were evaluated: "exact", "identity-coupling" or "sinkhorn:<eps>".
  std::string ot_method;
  std::map<std::string, double> diagnostics;
};

struct RegularizationConfig {
  double alpha = 0.0;
  double p = 2.0;
  std::optional<GridMeasure> prior;  ///< 𝓜, on the parameter grid

  void validate() const;
};

/// Controls transport objective evaluation for particle solvers.
struct TransportOptions {
  /// Exact OT is run whenever the data has at most this many points; larger
  /// inputs report the identity-coupling cost (optimal by construction).
  std::size_t exact_limit = 256;
  std::optional<OtMethod> force;  ///< always use this method instead
  ArgminOptions argmin{};
};

/// Membership test for R = G(Θ): analytic for the built-in maps, otherwise
/// |P_G(y) − y| ≤ tol.
RegionPredicate range_predicate(const ForwardMap& g, double tol = 1e-9);

Vector inversion_map(const ForwardMap& g, const Vector& y, double metric_p = 2.0);
Vector projection(const ForwardMap& g, const Vector& y, double metric_p = 2.0);
Vector least_norm_map(const ForwardMap& g, const Vector& y);
Vector reg_inversion_map(const ForwardMap& g, const Vector& y, const RegularizationConfig& cfg);

/// Minimizer of D_φ(G#ρ ‖ ρy): the pushforward is ρy conditioned on R and the
/// parameter measure pulls each range point back through the inversion map.
SolveReport conditional_reconstruction(const ForwardMap& g, const ParticleMeasure& rho_y,
                                       const RegionPredicate& range, const PhiKind& kind);
SolveReport conditional_reconstruction(const ForwardMap& g, const GridMeasure& rho_y,
                                       const RegionPredicate& range, const PhiKind& kind);

/// Minimizer of W_p(G#ρ, ρy): the inversion map pushed through ρy.
SolveReport marginal_reconstruction(const ForwardMap& g, const ParticleMeasure& rho_y, double p,
                                    const TransportOptions& opts = {});

struct LevelSetMass {
  double value = 0.0;
  bool floored = false;
};

/// Band estimate of ∫ δ(G(x) − y) w(x) dx: the (weighted) volume of
/// {x ∈ Θ : ‖G(x) − y‖∞ < h/2} over h^n, on the cells of `theta_grid`.
/// Floored at one cell's volume over h^n.
LevelSetMass level_set_mass(const ForwardMap& g, const GridSpec& theta_grid, const Vector& y, double h,
                            const GridMeasure* weight = nullptr);

/// Maximum-entropy reconstruction on a parameter grid. Each fiber is the set of
/// cells whose image falls in one ρy bin; the solution is uniform on fibers.
SolveReport entropy_solution(const ForwardMap& g, const GridSpec& theta_grid, const GridMeasure& rho_y);

/// 𝓗#ρy: every data point mapped to its minimum-norm preimage.
SolveReport moment_solution(const ForwardMap& g, const ParticleMeasure& rho_y, const ArgminOptions& opts = {});

/// KL(G#ρ ‖ ρy) + α·KL(ρ ‖ 𝓜): ρ ∝ 𝓜·(ρy(G) / level-set mass under 𝓜)^{1/(1+α)}.
SolveReport reg_entropy_solution(const ForwardMap& g, const GridSpec& theta_grid, const GridMeasure& rho_y,
                                 const RegularizationConfig& cfg);

/// F̃#ρy, the minimizer of W_p^p(G#ρ, ρy) + α∫|x|^p dρ.
SolveReport reg_wp_solution(const ForwardMap& g, const ParticleMeasure& rho_y, const RegularizationConfig& cfg,
                            const TransportOptions& opts = {});

struct IdentityCheck {
  double lhs = 0.0;  ///< W_p^p(G̃#ρx, ρy ⊗ δ₀)
  double rhs = 0.0;  ///< W_p^p(G#ρx, ρy) + α∫|x|^p dρx
};

IdentityCheck augmented_objective_identity_check(const ForwardMap& g, const ParticleMeasure& rho_x,
                                                 const ParticleMeasure& rho_y, const RegularizationConfig& cfg);

struct TikhonovBound {
  double bound_full = 0.0;
  double bound_simplified = 0.0;
  double noise_coefficient_full = 0.0;        ///< ‖T_α‖₂
  double bias_coefficient_full = 0.0;         ///< ‖T_α − A†‖₂
  double noise_coefficient_simplified = 0.0;  ///< 1/(2√α)
  double bias_coefficient_simplified = 0.0;   ///< α/(σ_m(σ_m² + α))
};

/// Error bound for the Tikhonov reconstruction (AᵀA + αI)⁻¹Aᵀ#ρy^δ against A†#ρy.
TikhonovBound tikhonov_bound(const Matrix& a, double alpha, double w2_noise, double second_moment_true);

}  // namespace minv
