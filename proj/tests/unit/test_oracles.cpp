#include <cmath>
#include <numbers>

#include "doctest.h"
#include "minv/error.hpp"
#include "minv/maps.hpp"
#include "minv/oracles.hpp"
#include "minv/transport.hpp"

using namespace minv;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

ParticleMeasure line_points(std::initializer_list<double> xs) {
  Matrix pts(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) pts(i++, 0) = x;
  return ParticleMeasure::uniform(pts);
}

}  // namespace

TEST_CASE("mirror descent: one fiber spreads mass evenly") {
  SimplexProblem prob;
  prob.fiber_of_cell = {0, 0, 0, 0, 0};
  prob.target = {1.0};
  const auto res = mirror_descent_simplex(prob, 500, 0.5);
  for (double p : res.masses) CHECK(p == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(res.constraint_residual < 1e-12);
}

TEST_CASE("mirror descent: two fibers split by their targets") {
  SimplexProblem prob;
  prob.fiber_of_cell = {0, 0, 1, 1, 1};
  prob.target = {0.3, 0.7};
  const auto res = mirror_descent_simplex(prob, 500, 0.5);
  const double expect[] = {0.15, 0.15, 0.7 / 3, 0.7 / 3, 0.7 / 3};
  for (std::size_t c = 0; c < 5; ++c) CHECK(res.masses[c] == doctest::Approx(expect[c]).epsilon(1e-10));
  // Closed-form optimum of Σ p log p under the constraint.
  const double opt = 0.3 * std::log(0.15) + 0.7 * std::log(0.7 / 3);
  CHECK(std::abs(res.objective - opt) < 1e-6);
}

TEST_CASE("mirror descent: KL to prior keeps prior ratios inside a fiber") {
  for (double alpha : {0.5, 1.0, 4.0}) {
    SimplexProblem prob;
    prob.fiber_of_cell = {0, 0};
    prob.target = {1.0};
    prob.objective = SimplexProblem::KLToPrior{{0.25, 0.75}, alpha};
    const auto res = mirror_descent_simplex(prob, 5000, 1.0 / (1.0 + alpha));
    CHECK(res.masses[0] == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(res.masses[1] == doctest::Approx(0.75).epsilon(1e-9));
  }
}

TEST_CASE("mirror descent: KL to prior across fibers matches the tempered closed form") {
  // p_c ∝ m_c (t_b / M_b)^{1/(1+α)}
  SimplexProblem prob;
  prob.fiber_of_cell = {0, 0, 1, 1, 1, 2};
  prob.target = {0.2, 0.5, 0.3};
  const std::vector<double> prior = {0.1, 0.2, 0.05, 0.15, 0.3, 0.2};
  const double alpha = 1.5;
  prob.objective = SimplexProblem::KLToPrior{prior, alpha};
  const auto res = mirror_descent_simplex(prob, 20000, 1.0 / (1.0 + alpha));
  const double fiber_prior[] = {0.3, 0.5, 0.2};
  std::vector<double> expect(6);
  double z = 0.0;
  for (std::size_t c = 0; c < 6; ++c) {
    const auto b = prob.fiber_of_cell[c];
    expect[c] = prior[c] * std::pow(prob.target[b] / fiber_prior[b], 1.0 / (1.0 + alpha));
    z += expect[c];
  }
  for (std::size_t c = 0; c < 6; ++c) CHECK(res.masses[c] == doctest::Approx(expect[c] / z).epsilon(1e-9));
}

TEST_CASE("mirror descent: failures") {
  SimplexProblem prob;
  prob.fiber_of_cell = {0, 0, 0};
  prob.target = {1.0};
  CHECK_THROWS_AS(mirror_descent_simplex(prob, 1, 0.01), Error);
  try {
    mirror_descent_simplex(prob, 1, 0.01);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotConverged);
  }
  prob.target = {0.5, 0.5};  // fiber 1 has no cells
  CHECK_THROWS_AS(mirror_descent_simplex(prob, 100, 0.5), Error);
}

TEST_CASE("brute-force OT") {
  SUBCASE("single pairing") {
    const auto a = line_points({1.0});
    const auto b = line_points({4.0});
    const auto res = brute_force_ot(a, b, cost_matrix(a.points(), b.points(), 2.0));
    CHECK(res.objective == doctest::Approx(9.0));
    CHECK(res.permutation == std::vector<std::size_t>{0});
  }
  SUBCASE("three points") {
    const auto a = line_points({0.0, 1.0, 2.0});
    const auto b = line_points({0.0, 2.0, 4.0});
    CHECK(brute_force_ot(a, b, cost_matrix(a.points(), b.points(), 1.0)).objective == doctest::Approx(1.0));
  }
  SUBCASE("identical measures") {
    const auto a = line_points({0.3, -1.0, 2.5, 7.0});
    const auto res = brute_force_ot(a, a, cost_matrix(a.points(), a.points(), 2.0));
    CHECK(res.objective == 0.0);
    CHECK(res.permutation == std::vector<std::size_t>{0, 1, 2, 3});
  }
  SUBCASE("too large") {
    const auto a = line_points({0, 1, 2, 3, 4, 5, 6, 7});
    try {
      brute_force_ot(a, a, cost_matrix(a.points(), a.points(), 1.0));
      FAIL("expected TooLarge");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::TooLarge);
    }
  }
}

TEST_CASE("grid argmin oracle") {
  SUBCASE("quadratic picks nearest lattice point") {
    const Vector a = v2(0.33, 0.71);
    const Vector x = grid_argmin_oracle([&](const Vector& p) { return (p - a).squaredNorm(); },
                                        Domain::box(v2(0, 0), v2(1, 1)), 11);
    CHECK(x[0] == doctest::Approx(0.3));
    CHECK(x[1] == doctest::Approx(0.7));
  }
  SUBCASE("regularized objective of the offset polar map at r = 0") {
    const auto g = offset_polar_map();
    Vector y(1);
    y[0] = 0.0;
    const Vector x = grid_argmin_oracle(
        [&](const Vector& p) { return (g(p) - y).squaredNorm() + p.squaredNorm(); },
        Domain::box(v2(0, 0), v2(2, 2)), 801);
    CHECK((x - v2(0.5, 0.5)).norm() <= 2e-3);
  }
  SUBCASE("least norm on the r = 0.5 fiber") {
    const auto g = offset_polar_map();
    const double band = 0.5 * 2.0 / 800;
    const Vector x = grid_argmin_oracle(
        [&](const Vector& p) {
          return std::abs(g(p)[0] - 0.5) <= band ? p.squaredNorm() : std::numeric_limits<double>::infinity();
        },
        g.theta(), 801);
    const double h = 1.0 - 0.5 / std::numbers::sqrt2;
    CHECK((x - v2(h, h)).norm() <= 2e-3);
  }
  SUBCASE("ties resolve to the lexicographically first point") {
    const Vector x = grid_argmin_oracle([](const Vector&) { return 1.0; }, Domain::box(v2(-1, -1), v2(1, 1)), 5);
    CHECK(x[0] == -1.0);
    CHECK(x[1] == -1.0);
  }
}

TEST_CASE("Bessel I0") {
  CHECK(bessel_i0(0.0) == 1.0);
  CHECK(bessel_i0(1.0) == doctest::Approx(1.266066).epsilon(1e-6));
  for (double a : {0.0, 0.5, 1.0, 2.0, 5.0, std::numbers::sqrt2 * 0.5}) {
    CAPTURE(a);
    CHECK(std::abs(bessel_i0(a) - bessel_i0_quadrature(a)) <= 1e-10 * bessel_i0(a));
  }
  CHECK_THROWS_AS(bessel_i0(701.0), Error);
  CHECK_THROWS_AS(bessel_i0(-1.0), Error);
}
