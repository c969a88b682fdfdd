#include <cmath>
#include <numbers>

#include "doctest.h"
#include "minv/error.hpp"
#include "minv/maps.hpp"
#include "minv/rng.hpp"

using namespace minv;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Vector v1(double a) {
  Vector v(1);
  v << a;
  return v;
}

}  // namespace

TEST_CASE("linear maps") {
  CHECK(linear_map(Matrix::Identity(2, 2))(v2(1, 2)) == v2(1, 2));
  Matrix embed(3, 2);
  embed << 1, 0, 0, 1, 0, 0;
  const Vector y = linear_map(embed)(v2(4, 5));
  CHECK(y[0] == 4);
  CHECK(y[1] == 5);
  CHECK(y[2] == 0);
  Matrix two(1, 1);
  two << 2;
  CHECK(linear_map(two)(v1(3))[0] == 6);
  CHECK(linear_map(two).matrix()(0, 0) == 2);
  CHECK_THROWS_AS(linear_map(two)(v2(1, 1)), Error);
  Matrix rank1(2, 2);
  rank1 << 1, 2, 2, 4;
  CHECK_THROWS_AS(linear_map(rank1), Error);
  CHECK_THROWS_AS((void)polar_map().matrix(), Error);
}

TEST_CASE("pseudoinverse") {
  Matrix two(1, 1);
  two << 2;
  CHECK(pseudoinverse(two)(0, 0) == doctest::Approx(0.5));
  Matrix embed(3, 2);
  embed << 1, 0, 0, 1, 0, 0;
  Matrix expect(2, 3);
  expect << 1, 0, 0, 0, 1, 0;
  CHECK((pseudoinverse(embed) - expect).norm() < 1e-14);
  CHECK((pseudoinverse(embed) * embed - Matrix::Identity(2, 2)).norm() < 1e-10);
  Matrix row(1, 2);
  row << 1, 1;
  CHECK(pseudoinverse(row)(0, 0) == doctest::Approx(0.5));
  CHECK(pseudoinverse(row)(1, 0) == doctest::Approx(0.5));
  CHECK((row * pseudoinverse(row))(0, 0) == doctest::Approx(1.0));

  auto rng = make_rng(4, "maps/pinv");
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index r = 1 + trial % 5, c = 1 + (trial / 5) % 5;
    Matrix a(r, c);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = standard_normal(rng);
    const Matrix p = pseudoinverse(a);
    if (r >= c) {
      CHECK((p * a - Matrix::Identity(c, c)).norm() < 1e-10);
    } else {
      CHECK((a * p - Matrix::Identity(r, r)).norm() < 1e-10);
    }
  }
}

TEST_CASE("Tikhonov inverse") {
  Matrix two(1, 1);
  two << 2;
  // argmin |2x − y|² + x² gives x = 2y/5.
  CHECK(tikhonov_inverse(two, 1.0)(0, 0) == doctest::Approx(0.4));
  CHECK(tikhonov_inverse(two, 0.0)(0, 0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(tikhonov_inverse(two, -1.0), Error);
}

TEST_CASE("polar map") {
  const auto g = polar_map();
  CHECK((g(v2(1, 0)) - v2(1, 0)).norm() < 1e-15);
  CHECK((g(v2(0.5, std::numbers::pi)) - v2(-0.5, 0)).norm() < 1e-15);
  CHECK(g(v2(0, 1.234)).norm() == 0.0);
  const Box b = g.theta().bounding_box();
  for (int i = 0; i <= 50; ++i) {
    for (int j = 0; j <= 50; ++j) {
      const Vector x = v2(b.lower[0] + (b.upper[0] - b.lower[0]) * i / 50, b.lower[1] + (b.upper[1] - b.lower[1]) * j / 50);
      CHECK(g(x).squaredNorm() <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("offset polar map") {
  const auto g = offset_polar_map();
  CHECK(g(v2(1, 1))[0] == 0.0);
  CHECK(g(v2(1, 0))[0] == 1.0);
  const double s = 0.5 / std::numbers::sqrt2;
  CHECK(g(v2(1 + s, 1 + s))[0] == doctest::Approx(0.5));
  CHECK(g.theta().contains(v2(1, 0)));
  CHECK_FALSE(g.theta().contains(v2(0, 0)));
}

TEST_CASE("augmented maps") {
  const auto id = identity_map(1);
  const Vector y = augment(id, 1.0, 2.0)(v1(3));
  CHECK(y == v2(3, 3));
  Matrix two(1, 1);
  two << 2;
  const Vector z = augment(linear_map(two), 4.0, 2.0)(v1(1));
  CHECK(z[0] == doctest::Approx(2));
  CHECK(z[1] == doctest::Approx(2));
  const auto ga = augment(polar_map(), 0.7, 3.0);
  CHECK(ga.out_dim() == 4);
  CHECK(ga(Vector::Zero(2)).tail(2).norm() == 0.0);
  CHECK(ga.base() != nullptr);
  CHECK(ga.augment_alpha() == 0.7);
  auto rng = make_rng(6, "maps/augment");
  for (int i = 0; i < 20; ++i) {
    const Vector x = v2(uniform01(rng), 2 * std::numbers::pi * uniform01(rng));
    CHECK(ga(x).head(2) == polar_map()(x));
  }
  CHECK_THROWS_AS(augment(id, -1.0, 2.0), Error);
  CHECK_THROWS_AS(augment(id, 1.0, 0.5), Error);
}

TEST_CASE("expression maps") {
  const auto g = expression_map({"sqrt((x1-1)^2 + (x2-1)^2)"}, 2, Domain::ball(v2(1, 1), 1.0));
  const auto ref = offset_polar_map();
  for (double t : {0.0, 0.3, 1.7, 4.0}) {
    const Vector x = v2(1 + 0.6 * std::cos(t), 1 + 0.6 * std::sin(t));
    CHECK(g(x)[0] == doctest::Approx(ref(x)[0]));
  }
  CHECK(g.kind() == MapKind::Custom);
  CHECK_THROWS_AS(expression_map({"x3"}, 2, Domain::whole(2)), Error);
}
