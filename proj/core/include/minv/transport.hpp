#pragma once

#include <cstddef>
#include <span>

#include "minv/measures.hpp"

namespace minv {

/// Coupling between two discrete measures; rows follow the source, columns the target.
struct TransportPlan {
  Matrix coupling;
  double objective = 0.0;  ///< Σ coupling ∘ cost
  std::size_t iterations = 0;

  [[nodiscard]] Vector row_sums() const { return coupling.rowwise().sum(); }
  [[nodiscard]] Vector col_sums() const { return coupling.colwise().sum().transpose(); }
};

/// C[i][j] = |x_i − y_j|^p with the Euclidean norm. Rows of X and Y are points.
Matrix cost_matrix(const Matrix& x, const Matrix& y, double p);

struct ExactOtOptions {
  /// Pivot budget; SolverStall is raised when it is exhausted.
  std::size_t max_pivots = 0;  // 0 → 50·(m+n)² + 10000
};

/// Exact discrete optimal transport by the transportation (network) simplex
/// method on the bipartite graph. Marginals must have equal total mass up to 1e-9.
TransportPlan exact_ot(std::span<const double> a, std::span<const double> b, const Matrix& cost,
                       const ExactOtOptions& opts = {});
TransportPlan exact_ot(const ParticleMeasure& mu, const ParticleMeasure& nu, const Matrix& cost,
                       const ExactOtOptions& opts = {});

struct SinkhornOptions {
  double epsilon = 1e-2;
  std::size_t max_iter = 10000;
  /// L1 marginal error at which iterations stop.
  double tolerance = 1e-9;
  /// Run a geometric ladder of decreasing ε before the target value.
  bool epsilon_scaling = true;
};

/// Entropic OT with log-domain (stabilized) Sinkhorn updates. The reported
/// objective is the transport cost ⟨P, C⟩ of the entropic plan. Throws
/// NotConverged if the marginal error is still above 1e-6 after max_iter.
TransportPlan sinkhorn(std::span<const double> a, std::span<const double> b, const Matrix& cost,
                       const SinkhornOptions& opts = {});
TransportPlan sinkhorn(const ParticleMeasure& mu, const ParticleMeasure& nu, const Matrix& cost,
                       const SinkhornOptions& opts = {});

struct OtMethod {
  enum class Kind { Exact, Sinkhorn };
  Kind kind = Kind::Exact;
  double epsilon = 1e-3;

  static OtMethod exact() { return {}; }
  static OtMethod entropic(double eps) { return {Kind::Sinkhorn, eps}; }
};

/// Optimal transport cost W_p^p between particle measures.
double transport_cost(const ParticleMeasure& mu, const ParticleMeasure& nu, double p,
                      OtMethod method = OtMethod::exact());

/// W_p(μ, ν) = (transport cost)^{1/p}.
double wasserstein_p(const ParticleMeasure& mu, const ParticleMeasure& nu, double p,
                     OtMethod method = OtMethod::exact());

}  // namespace minv
