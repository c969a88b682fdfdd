#pragma once

#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

#include "minv/domain.hpp"
#include "minv/measures.hpp"

namespace minv {

/// Discrete fiber-constrained problem over cell masses p ≥ 0.
///
/// `fiber_of_cell[c]` is the data bin that parameter cell c maps into (the one
/// nonzero of column c of the binary membership matrix B).
struct SimplexProblem {
  struct Entropy {};
  /// KL(Bp ‖ target) + α·KL(p ‖ prior).
  struct KLToPrior {
    std::vector<double> prior;
    double alpha = 1.0;
  };

  std::vector<std::size_t> fiber_of_cell;
  std::vector<double> target;
  std::variant<Entropy, KLToPrior> objective = Entropy{};
};

struct MirrorDescentResult {
  std::vector<double> masses;
  std::size_t iterations = 0;
  double objective = 0.0;
  double constraint_residual = 0.0;  ///< Σ_b |(Bp)_b − target_b|
};

/// Entropic mirror descent (multiplicative updates).
///
/// Entropy objective: minimizes Σ p log p subject to Bp = target; each step
/// is a KL (Bregman) projection onto the per-fiber mass constraints, which is
/// a rescaling inside every fiber. KL-to-prior objective: unconstrained over
/// the probability simplex. Throws NotConverged when the log-update stays above
/// `tol` after `iters` steps.
MirrorDescentResult mirror_descent_simplex(const SimplexProblem& prob, std::size_t iters, double step,
                                           double tol = 1e-13);

struct BruteForceResult {
  Matrix plan;
  double objective = 0.0;
  std::vector<std::size_t> permutation;  ///< source i ↦ target permutation[i]
};

/// Minimum over all n! matchings; equal-weight, equal-count inputs with n ≤ 7.
BruteForceResult brute_force_ot(const ParticleMeasure& mu, const ParticleMeasure& nu, const Matrix& cost);

/// Exhaustive search over a `resolution`-per-axis lattice (endpoints included)
/// of Θ's bounding box; first minimum in lexicographic order wins.
Vector grid_argmin_oracle(const std::function<double(const Vector&)>& objective, const Domain& theta,
                          std::size_t resolution);

/// Modified Bessel function I₀ by its power series Σ (a²/4)^k / (k!)².
double bessel_i0(double a);

/// I₀(a) = (1/2π)∫₀^{2π} exp(a cos θ) dθ by the periodic trapezoid rule.
double bessel_i0_quadrature(double a, std::size_t points = 512);

}  // namespace minv
