#include "minv/domain.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "minv/error.hpp"

namespace minv {

Box::Box(Vector lo, Vector hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw Error(ErrorCode::InvalidDomain, "box bounds must be nonempty and of equal length");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i]) || !(lower[i] < upper[i])) {
      throw Error(ErrorCode::InvalidDomain, "box bounds must be strictly ordered on every axis");
    }
  }
}

bool Box::bounded() const noexcept { return lower.allFinite() && upper.allFinite(); }

bool Box::contains(const Vector& x, double tol) const {
  if (x.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
  }
  return true;
}

double Box::volume() const { return (upper - lower).prod(); }

Vector Box::clamp(const Vector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }

Ball::Ball(Vector c, double r) : center(std::move(c)), radius(r) {
  if (center.size() == 0 || !center.allFinite()) {
    throw Error(ErrorCode::InvalidDomain, "ball center must be a finite nonempty vector");
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::InvalidDomain, "ball radius must be positive");
  }
}

bool Ball::contains(const Vector& x, double tol) const {
  if (x.size() != center.size()) return false;
  return (x - center).norm() <= radius + tol;
}

Box Ball::bounding_box() const {
  Vector r = Vector::Constant(center.size(), radius);
  return Box(center - r, center + r);
}

Domain Domain::box(Vector lower, Vector upper) {
  Box b(std::move(lower), std::move(upper));
  const auto d = b.dim();
  return Domain(Kind::Box, d, std::move(b), std::nullopt);
}

Domain Domain::ball(Vector center, double radius) {
  Ball b(std::move(center), radius);
  const auto d = b.dim();
  return Domain(Kind::Ball, d, std::nullopt, std::move(b));
}

Domain Domain::intersection(Box box, Ball ball) {
  if (box.dim() != ball.dim()) {
    throw Error(ErrorCode::InvalidDomain, "box and ball dimensions differ");
  }
  const auto d = box.dim();
  return Domain(Kind::Intersection, d, std::move(box), std::move(ball));
}

Domain Domain::whole(std::size_t dim) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto n = static_cast<Eigen::Index>(dim);
  return box(Vector::Constant(n, -inf), Vector::Constant(n, inf));
}

bool Domain::bounded() const noexcept {
  if (ball_) return true;
  return box_->bounded();
}

bool Domain::contains(const Vector& x, double tol) const {
  if (box_ && !box_->contains(x, tol)) return false;
  if (ball_ && !ball_->contains(x, tol)) return false;
  return static_cast<std::size_t>(x.size()) == dim_;
}

Box Domain::bounding_box() const {
  if (kind_ == Kind::Box) return *box_;
  const Box bb = ball_->bounding_box();
  if (kind_ == Kind::Ball) return bb;
  return Box(bb.lower.cwiseMax(box_->lower), bb.upper.cwiseMin(box_->upper));
}

std::string Domain::describe() const {
  std::ostringstream os;
  auto vec = [&os](const Vector& v) {
    os << '(';
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ')';
  };
  if (box_) {
    os << "box ";
    vec(box_->lower);
    os << "..";
    vec(box_->upper);
  }
  if (ball_) {
    if (box_) os << " ∩ ";
    os << "ball ";
    vec(ball_->center);
    os << " r=" << ball_->radius;
  }
  return os.str();
}

}  // namespace minv
