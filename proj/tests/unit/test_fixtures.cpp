#include <cmath>
#include <numbers>

#include "doctest.h"
#include "minv/error.hpp"
#include "minv/fixtures.hpp"
#include "minv/oracles.hpp"

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

FixtureOptions small() {
  FixtureOptions o;
  o.samples = 64;
  o.grid = 40;
  o.bins = 10;
  return o;
}

}  // namespace

TEST_CASE("every named fixture builds") {
  for (const auto& name : fixture_names()) {
    CAPTURE(name);
    const auto f = make_fixture(name, small());
    CHECK(f.name == name);
    CHECK_FALSE(f.description.empty());
    CHECK_FALSE(f.tolerance.empty());
    if (f.particles) CHECK(f.particles->is_normalized(1e-12));
    if (f.grid_data) CHECK(f.grid_data->is_normalized(1e-10));
  }
  CHECK_THROWS_AS(make_fixture("nope"), Error);
}

TEST_CASE("fixtures are deterministic in the seed") {
  const auto a = make_fixture("linear-over", small());
  const auto b = make_fixture("linear-over", small());
  CHECK(a.particles->points() == b.particles->points());
  auto other = small();
  other.seed += 1;
  CHECK(make_fixture("linear-over", other).particles->points() != a.particles->points());
}

TEST_CASE("polar fixture") {
  const auto f = polar_overdetermined(small());
  const auto& pts = f.particles->points();
  std::size_t inside = 0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const double r = pts.row(i).norm();
    if (r <= 1.0) {
      ++inside;
    } else {
      CHECK(r == doctest::Approx(2.0));
    }
  }
  CHECK(inside == 32);
  double disc = 0.0;
  for (std::size_t c = 0; c < f.grid_data->size(); ++c) {
    if (f.grid_data->grid().center(c).norm() <= 1.0) disc += f.grid_data->cell_mass(c);
  }
  CHECK(disc == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.analytic_density(v2(0.3, 0.1)) == doctest::Approx(1.0 / std::numbers::pi));
  CHECK(f.analytic_density(v2(1.5, 0.0)) == 0.0);
  CHECK((f.analytic_map(v2(0, 3)) - v2(0, 1)).norm() < 1e-15);
  CHECK((f.analytic_map(v2(0.2, 0.1)) - v2(0.2, 0.1)).norm() == 0.0);
}

TEST_CASE("offset polar fixtures") {
  const auto f = make_fixture("offset-polar-under", small());
  // Uniform radial data spreads over circles of length 2πr.
  CHECK(f.analytic_density(v2(1.5, 1.0)) == doctest::Approx(1.0 / std::numbers::pi));
  CHECK(f.analytic_density(v2(2.0, 2.0)) == 0.0);
  const double h = 1.0 - 0.5 / std::numbers::sqrt2;
  CHECK((f.analytic_map(v1(0.5)) - v2(h, h)).norm() < 1e-12);
  CHECK(f.theta_grid.has_value());

  Matrix bad(2, 1);
  bad << 0.5, 1.5;
  try {
    offset_polar_underdetermined(ParticleMeasure::uniform(bad), small());
    FAIL("expected UnsupportedData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedData);
  }
  Matrix ok(3, 1);
  ok << 0.1, 0.5, 0.9;
  const auto from_samples = offset_polar_underdetermined(ParticleMeasure::uniform(ok), small());
  CHECK(from_samples.grid_data->is_normalized(1e-10));

  const auto w2 = make_fixture("offset-polar-reg-w2", small());
  CHECK((w2.analytic_map(v1(0.0)) - v2(0.5, 0.5)).norm() < 1e-15);
  CHECK((w2.analytic_map(v1(std::numbers::sqrt2 / 2)) - v2(0.25, 0.25)).norm() < 1e-15);
  auto zero = small();
  zero.alpha = 0.0;
  // Without regularization the map reaches the near end of each fiber.
  CHECK((make_fixture("offset-polar-reg-w2", zero).analytic_map(v1(0.0)) - v2(1, 1)).norm() < 1e-15);
}

TEST_CASE("Gaussian prior on a circle has the Bessel closed form") {
  const auto f = make_fixture("offset-polar-reg-kl", small());
  REQUIRE(f.reg.prior.has_value());
  CHECK(f.reg.prior->is_normalized(1e-10));
  for (double r : {0.1, 0.5, 0.9}) {
    const int n = 4096;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      const double t = 2.0 * std::numbers::pi * (k + 0.5) / n;
      sum += std::exp(-0.5 * (v2(1 + r * std::cos(t), 1 + r * std::sin(t))).squaredNorm());
    }
    const double line = sum * 2.0 * std::numbers::pi * r / n;
    const double closed = 2.0 * std::numbers::pi * r * std::exp(-(2.0 + r * r) / 2.0) * bessel_i0(std::numbers::sqrt2 * r);
    CHECK(line == doctest::Approx(closed).epsilon(1e-10));
  }
  // Density over prior is constant on each circle.
  const double r = 0.4;
  const auto ratio = [&](double t) {
    const Vector x = v2(1 + r * std::cos(t), 1 + r * std::sin(t));
    return f.analytic_density(x) / std::exp(-0.5 * x.squaredNorm());
  };
  CHECK(ratio(0.3) == doctest::Approx(ratio(2.5)).epsilon(1e-12));
}

TEST_CASE("linear fixtures") {
  Matrix tall(3, 2);
  tall << 1, 0, 0, 1, 1, 1;
  const auto data = gaussian_particles(10, 3, 1, "test/linear");
  const auto over = linear_fixture(tall, LinearRegime::Over, data);
  CHECK(over.formulation == Formulation::Marginal);
  Vector y(3);
  y << 1, 2, 3;
  CHECK((over.analytic_map(y) - pseudoinverse(tall) * y).norm() < 1e-14);
  const auto reg = linear_fixture(tall, LinearRegime::Over, data, 0.5);
  CHECK(reg.name == "linear-reg");
  CHECK((reg.analytic_map(y) - (tall.transpose() * tall + 0.5 * Matrix::Identity(2, 2)).inverse() * tall.transpose() * y)
            .norm() < 1e-12);
  CHECK_THROWS_AS(linear_fixture(tall, LinearRegime::Under, data), Error);
  CHECK_THROWS_AS(linear_fixture(tall, LinearRegime::Over, gaussian_particles(4, 2, 1, "x")), Error);
}

TEST_CASE("quantile samples") {
  const auto q = quantile_samples([](double) { return 1.0; }, 4);
  CHECK(q.point(0)[0] == doctest::Approx(0.125));
  CHECK(q.point(3)[0] == doctest::Approx(0.875));
  const auto lin = quantile_samples([](double r) { return 2.0 * r; }, 1000);
  double mean = 0.0;
  for (std::size_t i = 0; i < lin.size(); ++i) mean += lin.point(i)[0] * lin.weight(i);
  CHECK(mean == doctest::Approx(2.0 / 3.0).epsilon(1e-3));
  CHECK_THROWS_AS(quantile_samples([](double) { return 0.0; }, 3), Error);
}
