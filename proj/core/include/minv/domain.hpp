#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Dense>

namespace minv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Axis-aligned box. Bounds may be infinite on either side, which is how the
/// unbounded parameter spaces of the linear examples are represented.
struct Box {
  Vector lower;
  Vector upper;

  Box() = default;
  Box(Vector lo, Vector hi);

  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(lower.size()); }
  [[nodiscard]] bool bounded() const noexcept;
  [[nodiscard]] bool contains(const Vector& x, double tol = 0.0) const;
  [[nodiscard]] double volume() const;
  [[nodiscard]] Vector clamp(const Vector& x) const;
};

struct Ball {
  Vector center;
  double radius = 1.0;

  Ball() = default;
  Ball(Vector c, double r);

  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(center.size()); }
  [[nodiscard]] bool contains(const Vector& x, double tol = 0.0) const;
  [[nodiscard]] Box bounding_box() const;
};

/// Parameter-space description: a box, a closed ball, or their intersection.
class Domain {
 public:
  enum class Kind { Box, Ball, Intersection };

  static Domain box(Vector lower, Vector upper);
  static Domain ball(Vector center, double radius);
  static Domain intersection(Box box, Ball ball);
  /// ℝ^dim, stored as a box with infinite bounds.
  static Domain whole(std::size_t dim);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] bool bounded() const noexcept;
  [[nodiscard]] bool contains(const Vector& x, double tol = 0.0) const;
  /// Smallest box enclosing the domain (box ∩ ball bounding box for intersections).
  [[nodiscard]] Box bounding_box() const;

  [[nodiscard]] const std::optional<Box>& box_part() const noexcept { return box_; }
  [[nodiscard]] const std::optional<Ball>& ball_part() const noexcept { return ball_; }

  [[nodiscard]] std::string describe() const;

 private:
  Domain(Kind kind, std::size_t dim, std::optional<Box> box, std::optional<Ball> ball)
      : kind_(kind), dim_(dim), box_(std::move(box)), ball_(std::move(ball)) {}

  Kind kind_;
  std::size_t dim_;
  std::optional<Box> box_;
  std::optional<Ball> ball_;
};

}  // namespace minv
