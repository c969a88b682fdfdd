#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "minv/domain.hpp"
#include "minv/maps.hpp"

namespace minv {

using Objective = std::function<double(const Vector&)>;

struct PatternSearchOptions {
  std::size_t halvings = 50;
  std::size_t max_evaluations = 200000;
};

/// Derivative-free coordinate search. Trial points are clamped to Θ's bounding
/// box and rejected outside Θ; the step halves whenever no axis improves.
Vector pattern_search(const Objective& f, Vector x0, const Domain& theta, Vector steps,
                      const PatternSearchOptions& opts = {});

/// Gauss–Newton projection of x onto {x : G(x) = y} using a central-difference
/// Jacobian and its pseudoinverse. Returns nullopt if the residual cannot be
/// driven below `tol` or the result leaves Θ.
std::optional<Vector> project_to_fiber(const ForwardMap& g, Vector x, const Vector& y, double tol,
                                       std::size_t max_iter = 40);

struct ArgminOptions {
  /// Lattice points per axis for the coarse search; 0 picks a size from dim Θ.
  std::size_t resolution = 0;
  PatternSearchOptions refine{};
  /// Objective values within this (relative) tolerance of the coarse minimum tie.
  double tie_tol = 1e-12;
};

/// Pointwise argmin maps of one forward map: inversion F, projection P_G,
/// least-norm 𝓗 and the regularized map F̃. The coarse lattice over Θ and its
/// images are computed once and shared across queries. Linear maps on an
/// unbounded Θ use closed forms instead.
class PointwiseSolver {
 public:
  explicit PointwiseSolver(ForwardMap g, ArgminOptions opts = {});

  [[nodiscard]] Vector invert(const Vector& y) const;
  [[nodiscard]] Vector project(const Vector& y) const;
  [[nodiscard]] Vector least_norm(const Vector& y) const;
  [[nodiscard]] Vector regularized(const Vector& y, double alpha, double p) const;

  [[nodiscard]] const ForwardMap& map() const noexcept { return g_; }
  [[nodiscard]] bool closed_form() const noexcept { return closed_form_; }
  /// |G(x) − y| threshold for lattice points to count as fiber candidates.
  [[nodiscard]] double fiber_tolerance() const noexcept { return fiber_tol_; }
  [[nodiscard]] std::size_t lattice_size() const noexcept { return static_cast<std::size_t>(lattice_.rows()); }

 private:
  [[nodiscard]] Vector coarse_then_refine(const Vector& values, const Objective& f) const;

  ForwardMap g_;
  ArgminOptions opts_;
  bool closed_form_ = false;
  Matrix pinv_;
  Matrix lattice_;  // one row per lattice point inside Θ
  Matrix images_;   // G of each lattice row
  Vector spacing_;
  double fiber_tol_ = 0.0;
};

}  // namespace minv
