#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "minv/domain.hpp"

namespace minv {

enum class MapKind { Linear, Polar, OffsetPolar, Augmented, Custom };

/// Forward map G: Θ ⊆ ℝ^in_dim → ℝ^out_dim with an explicit parameter domain.
/// Immutable and cheap to copy; the evaluator must be pure.
class ForwardMap {
 public:
  using Evaluator = std::function<Vector(const Vector&)>;

  ForwardMap(std::size_t in_dim, std::size_t out_dim, Domain theta, Evaluator eval,
             MapKind kind = MapKind::Custom, std::string name = "custom");

  /// Evaluates G(x); throws DimensionMismatch on a wrongly sized input.
  Vector operator()(const Vector& x) const;

  [[nodiscard]] std::size_t in_dim() const noexcept { return in_dim_; }
  [[nodiscard]] std::size_t out_dim() const noexcept { return out_dim_; }
  [[nodiscard]] const Domain& theta() const noexcept { return theta_; }
  [[nodiscard]] MapKind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

  /// Stored matrix of a Linear map; throws InvalidArgument for other kinds.
  [[nodiscard]] const Matrix& matrix() const;

  /// Augmented maps remember what they were built from.
  [[nodiscard]] const ForwardMap* base() const noexcept { return base_.get(); }
  [[nodiscard]] double augment_alpha() const noexcept { return alpha_; }
  [[nodiscard]] double augment_p() const noexcept { return p_; }

  /// Same map on a different parameter domain.
  [[nodiscard]] ForwardMap with_domain(Domain theta) const;

 private:
  friend ForwardMap linear_map(const Matrix& a, Domain theta);
  friend ForwardMap augment(const ForwardMap& g, double alpha, double p);

  std::size_t in_dim_;
  std::size_t out_dim_;
  Domain theta_;
  Evaluator eval_;
  MapKind kind_;
  std::string name_;
  std::shared_ptr<const Matrix> matrix_;
  std::shared_ptr<const ForwardMap> base_;
  double alpha_ = 0.0;
  double p_ = 0.0;
};

/// Singular values of A below this fraction of the largest are treated as zero.
inline constexpr double kRankCutoff = 1e-12;

/// Numerical rank with the relative cutoff above.
std::size_t numerical_rank(const Matrix& a);

/// G(x) = A·x. Throws RankDeficient unless A has full rank.
ForwardMap linear_map(const Matrix& a, Domain theta);
ForwardMap linear_map(const Matrix& a);  // Θ = ℝ^cols
ForwardMap identity_map(std::size_t dim);

/// Left inverse (AᵀA)⁻¹Aᵀ for tall/square A, right inverse Aᵀ(AAᵀ)⁻¹ for wide A.
Matrix pseudoinverse(const Matrix& a);

/// (AᵀA + αI)⁻¹Aᵀ, the pointwise Tikhonov inverse.
Matrix tikhonov_inverse(const Matrix& a, double alpha);

/// (r, θ) ↦ (r cos θ, r sin θ) on [0,1]×[0,2π].
ForwardMap polar_map();

/// x ↦ |x − (1,1)| on the unit ball centered at (1,1).
ForwardMap offset_polar_map();

/// x ↦ (G(x), α^{1/p} x).
ForwardMap augment(const ForwardMap& g, double alpha, double p);

/// Map whose components are arithmetic expressions in x1..x_in_dim
/// (see expression.hpp for the grammar).
ForwardMap expression_map(const std::vector<std::string>& components, std::size_t in_dim,
                          Domain theta);

}  // namespace minv
