#include "minv/maps.hpp"

#include <cmath>
#include <numbers>

#include "minv/error.hpp"
#include "minv/expression.hpp"

namespace minv {

ForwardMap::ForwardMap(std::size_t in_dim, std::size_t out_dim, Domain theta, Evaluator eval,
                       MapKind kind, std::string name)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      theta_(std::move(theta)),
      eval_(std::move(eval)),
      kind_(kind),
      name_(std::move(name)) {
  if (in_dim_ == 0 || out_dim_ == 0) {
    throw Error(ErrorCode::InvalidArgument, "map dimensions must be positive");
  }
  if (theta_.dim() != in_dim_) {
    throw Error(ErrorCode::DimensionMismatch, "parameter domain dimension differs from map input dimension");
  }
  if (!eval_) throw Error(ErrorCode::InvalidArgument, "map evaluator is empty");
}

Vector ForwardMap::operator()(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != in_dim_) {
    throw Error(ErrorCode::DimensionMismatch, "map " + name_ + " expects input of dimension " +
                                                  std::to_string(in_dim_) + ", got " +
                                                  std::to_string(x.size()));
  }
  Vector y = eval_(x);
  if (static_cast<std::size_t>(y.size()) != out_dim_) {
    throw Error(ErrorCode::DimensionMismatch, "map " + name_ + " produced output of wrong dimension");
  }
  return y;
}

const Matrix& ForwardMap::matrix() const {
  if (!matrix_) throw Error(ErrorCode::InvalidArgument, "map " + name_ + " is not linear");
  return *matrix_;
}

ForwardMap ForwardMap::with_domain(Domain theta) const {
  if (theta.dim() != in_dim_) {
    throw Error(ErrorCode::DimensionMismatch, "replacement domain has wrong dimension");
  }
  ForwardMap copy = *this;
  copy.theta_ = std::move(theta);
  return copy;
}

std::size_t numerical_rank(const Matrix& a) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  if (!(smax > 0.0)) return 0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > kRankCutoff * smax) ++rank;
  }
  return rank;
}

namespace {

void require_full_rank(const Matrix& a) {
  const auto full = static_cast<std::size_t>(std::min(a.rows(), a.cols()));
  if (full == 0 || numerical_rank(a) < full) {
    throw Error(ErrorCode::RankDeficient, "matrix of shape " + std::to_string(a.rows()) + "x" +
                                              std::to_string(a.cols()) + " is not full rank");
  }
}

}  // namespace

ForwardMap linear_map(const Matrix& a, Domain theta) {
  require_full_rank(a);
  auto mat = std::make_shared<const Matrix>(a);
  ForwardMap g(static_cast<std::size_t>(a.cols()), static_cast<std::size_t>(a.rows()), std::move(theta),
               [mat](const Vector& x) -> Vector { return (*mat) * x; }, MapKind::Linear, "linear");
  g.matrix_ = std::move(mat);
  return g;
}

ForwardMap linear_map(const Matrix& a) {
  return linear_map(a, Domain::whole(static_cast<std::size_t>(a.cols())));
}

ForwardMap identity_map(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return linear_map(Matrix::Identity(n, n));
}

Matrix pseudoinverse(const Matrix& a) {
  require_full_rank(a);
  const Matrix at = a.transpose();
  if (a.rows() >= a.cols()) {
    return (at * a).llt().solve(at);
  }
  return at * (a * at).llt().solve(Matrix::Identity(a.rows(), a.rows()));
}

Matrix tikhonov_inverse(const Matrix& a, double alpha) {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be nonnegative");
  if (alpha == 0.0) return pseudoinverse(a);
  const Matrix at = a.transpose();
  const Matrix normal = at * a + alpha * Matrix::Identity(a.cols(), a.cols());
  return normal.llt().solve(at);
}

ForwardMap polar_map() {
  Vector lo(2), hi(2);
  lo << 0.0, 0.0;
  hi << 1.0, 2.0 * std::numbers::pi;
  return ForwardMap(
      2, 2, Domain::box(lo, hi),
      [](const Vector& x) -> Vector {
        Vector y(2);
        y << x[0] * std::cos(x[1]), x[0] * std::sin(x[1]);
        return y;
      },
      MapKind::Polar, "polar");
}

ForwardMap offset_polar_map() {
  Vector c(2);
  c << 1.0, 1.0;
  return ForwardMap(
      2, 1, Domain::ball(c, 1.0),
      [](const Vector& x) -> Vector {
        Vector y(1);
        y[0] = std::hypot(x[0] - 1.0, x[1] - 1.0);
        return y;
      },
      MapKind::OffsetPolar, "offset-polar");
}

ForwardMap augment(const ForwardMap& g, double alpha, double p) {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be nonnegative");
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "p must be >= 1");
  auto base = std::make_shared<const ForwardMap>(g);
  const double scale = std::pow(alpha, 1.0 / p);
  const auto n = static_cast<Eigen::Index>(g.out_dim());
  const auto m = static_cast<Eigen::Index>(g.in_dim());
  ForwardMap aug(
      g.in_dim(), g.out_dim() + g.in_dim(), g.theta(),
      [base, scale, n, m](const Vector& x) -> Vector {
        Vector y(n + m);
        y.head(n) = (*base)(x);
        y.tail(m) = scale * x;
        return y;
      },
      MapKind::Augmented, "augmented(" + g.name() + ")");
  aug.base_ = std::move(base);
  aug.alpha_ = alpha;
  aug.p_ = p;
  return aug;
}

ForwardMap expression_map(const std::vector<std::string>& components, std::size_t in_dim, Domain theta) {
  if (components.empty()) throw Error(ErrorCode::InvalidArgument, "expression map needs at least one component");
  std::vector<Expression> exprs;
  exprs.reserve(components.size());
  for (const auto& c : components) exprs.push_back(Expression::parse(c, in_dim));
  auto shared = std::make_shared<const std::vector<Expression>>(std::move(exprs));
  const std::size_t out_dim = components.size();
  return ForwardMap(
      in_dim, out_dim, std::move(theta),
      [shared](const Vector& x) -> Vector {
        Vector y(static_cast<Eigen::Index>(shared->size()));
        const std::span<const double> vars(x.data(), static_cast<std::size_t>(x.size()));
        for (std::size_t k = 0; k < shared->size(); ++k) y[static_cast<Eigen::Index>(k)] = (*shared)[k](vars);
        return y;
      },
      MapKind::Custom, "expression");
}

}  // namespace minv
