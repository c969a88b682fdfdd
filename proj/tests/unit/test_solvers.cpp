#include <cmath>
#include <numbers>

#include "doctest.h"
#include "minv/error.hpp"
#include "minv/oracles.hpp"
#include "minv/rng.hpp"
#include "minv/solvers.hpp"

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

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

ParticleMeasure cloud(std::uint64_t seed, std::size_t n, std::size_t d) {
  auto rng = make_rng(seed, "solvers/cloud");
  Matrix pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = standard_normal(rng);
  return ParticleMeasure::uniform(pts);
}

GridMeasure uniform_bins(std::size_t n) {
  return normalize(GridMeasure(GridSpec(Box(v1(0.0), v1(1.0)), {n}), std::vector<double>(n, 1.0)));
}

}  // namespace

TEST_CASE("conditional reconstruction") {
  const auto g = polar_map();
  const auto range = range_predicate(g);
  SUBCASE("two atoms, half in range") {
    Matrix pts(2, 2);
    pts << 0.5, 0, 2, 0;
    const auto rep = conditional_reconstruction(g, ParticleMeasure::uniform(pts), range, PhiKind::kl());
    CHECK(rep.objective == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(rep.diagnostics.at("jensen_gap") == doctest::Approx(0.0));
    const auto& push = std::get<ParticleMeasure>(rep.pushforward_of_optimizer);
    CHECK(push.weight(0) == 1.0);
    const auto& opt = std::get<ParticleMeasure>(rep.optimizer);
    REQUIRE(opt.size() == 1);
    CHECK((g(opt.point(0)) - v2(0.5, 0)).norm() < 1e-9);
  }
  SUBCASE("data already in the range") {
    const auto data = ParticleMeasure::uniform(cloud(1, 40, 2).points() * 0.3);
    const auto rep = conditional_reconstruction(g, data, range, PhiKind::chi_squared());
    CHECK(rep.objective <= 1e-20);
    CHECK((std::get<ParticleMeasure>(rep.pushforward_of_optimizer).weights() - data.weights()).cwiseAbs().maxCoeff() <=
          1e-15);
    CHECK(std::get<ParticleMeasure>(rep.optimizer).is_normalized());
  }
  SUBCASE("no data in the range") {
    Matrix pts(1, 2);
    pts << 3, 3;
    CHECK(code_of([&] { conditional_reconstruction(g, ParticleMeasure::uniform(pts), range, PhiKind::kl()); }) ==
          ErrorCode::EmptyRangeMass);
  }
  SUBCASE("range tests") {
    CHECK(range(v2(1, 0)));
    CHECK_FALSE(range(v2(1.01, 0)));
    const auto op = range_predicate(offset_polar_map());
    CHECK(op(v1(1.0)));
    CHECK_FALSE(op(v1(1.1)));
    Matrix a(3, 2);
    a << 1, 0, 0, 1, 0, 0;
    const auto lin = range_predicate(linear_map(a));
    Vector in(3), out(3);
    in << 1, 2, 0;
    out << 1, 2, 0.1;
    CHECK(lin(in));
    CHECK_FALSE(lin(out));
    const auto generic = range_predicate(expression_map({"x1*cos(x2)", "x1*sin(x2)"}, 2, g.theta()));
    CHECK(generic(v2(0.3, -0.4)));
    CHECK_FALSE(generic(v2(1.2, 0)));
  }
}

TEST_CASE("marginal reconstruction") {
  SUBCASE("range-supported data is reproduced") {
    const auto g = polar_map();
    Matrix pts(5, 2);
    pts << 0.1, 0.2, -0.5, 0.3, 0.0, -0.9, 0.6, 0.6, -0.2, -0.1;
    const auto rep = marginal_reconstruction(g, ParticleMeasure::uniform(pts), 2.0);
    CHECK(rep.objective <= 1e-7);
    CHECK(rep.ot_method == "exact");
  }
  SUBCASE("overdetermined linear map gives the left inverse") {
    Matrix a(3, 2);
    a << 1, 0, 0, 1, 1, 1;
    const auto data = cloud(2, 30, 3);
    const auto rep = marginal_reconstruction(linear_map(a), data, 2.0);
    const auto& opt = std::get<ParticleMeasure>(rep.optimizer);
    const Matrix expect = (pseudoinverse(a) * data.points().transpose()).transpose();
    CHECK((opt.points() - expect).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(rep.diagnostics.at("exact_ot_cost") <= rep.diagnostics.at("identity_coupling_cost") + 1e-12);
    CHECK(std::abs(rep.diagnostics.at("exact_ot_cost") - rep.diagnostics.at("identity_coupling_cost")) <= 1e-9);
  }
  SUBCASE("no candidate beats the projection") {
    const auto g = polar_map();
    Matrix pts(6, 2);
    pts << 2, 0, 0, 1.5, -0.3, 0.2, 0.5, -0.5, -1.2, -1.2, 0.1, 0.0;
    const auto data = ParticleMeasure::uniform(pts);
    const auto rep = marginal_reconstruction(g, data, 2.0);
    auto rng = make_rng(3, "solvers/marginal-cert");
    for (int trial = 0; trial < 50; ++trial) {
      Matrix xs(6, 2);
      for (Eigen::Index i = 0; i < 6; ++i) xs.row(i) << uniform01(rng), 2 * std::numbers::pi * uniform01(rng);
      const double w = wasserstein_p(pushforward(g, ParticleMeasure::uniform(xs)), data, 2.0);
      CHECK(w >= rep.objective - 1e-9);
    }
  }
}

TEST_CASE("level-set mass") {
  SUBCASE("offset polar circle at r = 0.5 has length π") {
    const auto g = offset_polar_map();
    const GridSpec grid(Box(v2(0, 0), v2(2, 2)), {400, 400});
    const auto lm = level_set_mass(g, grid, v1(0.5), 0.02);
    CHECK_FALSE(lm.floored);
    CHECK(lm.value == doctest::Approx(std::numbers::pi).epsilon(0.02));
  }
  SUBCASE("squared radius over the plane gives π") {
    const ForwardMap g(2, 1, Domain::box(v2(-2, -2), v2(2, 2)), [](const Vector& x) { return v1(x.squaredNorm()); });
    const GridSpec grid(Box(v2(-2, -2), v2(2, 2)), {400, 400});
    const auto lm = level_set_mass(g, grid, v1(1.0), 0.05);
    CHECK(lm.value == doctest::Approx(std::numbers::pi).epsilon(0.02));
  }
  SUBCASE("constant map on a unit square returns 1/h") {
    const ForwardMap g(2, 1, Domain::box(v2(0, 0), v2(1, 1)), [](const Vector&) { return v1(0.3); });
    const GridSpec grid(Box(v2(0, 0), v2(1, 1)), {20, 20});
    CHECK(level_set_mass(g, grid, v1(0.3), 0.1).value == doctest::Approx(10.0));
    const auto miss = level_set_mass(g, grid, v1(0.9), 0.1);
    CHECK(miss.floored);
    CHECK(miss.value == doctest::Approx(grid.cell_volume() / 0.1));
  }
  CHECK_THROWS_AS(level_set_mass(offset_polar_map(), GridSpec(Box(v2(0, 0), v2(2, 2)), {4, 4}), v1(0.5), 0.0), Error);
}

TEST_CASE("entropy solution") {
  SUBCASE("identity map returns the data") {
    const GridSpec grid(Box(v2(0, 0), v2(1, 1)), {8, 8});
    auto rng = make_rng(4, "solvers/entropy-id");
    std::vector<double> vals(64);
    for (auto& v : vals) v = 0.1 + uniform01(rng);
    const auto data = normalize(GridMeasure(grid, vals));
    const auto rep = entropy_solution(identity_map(2).with_domain(Domain::box(v2(0, 0), v2(1, 1))), grid, data);
    const auto& opt = std::get<GridMeasure>(rep.optimizer);
    for (std::size_t i = 0; i < 64; ++i) CHECK(opt.value(i) == doctest::Approx(data.value(i)).epsilon(1e-12));
  }
  SUBCASE("coordinate projection of a uniform square matches the simplex oracle") {
    Matrix a(1, 2);
    a << 1, 0;
    const auto g = linear_map(a, Domain::box(v2(0, 0), v2(1, 1)));
    const GridSpec grid(Box(v2(0, 0), v2(1, 1)), {40, 40});
    const auto bins = uniform_bins(10);
    const auto rep = entropy_solution(g, grid, bins);
    const auto& opt = std::get<GridMeasure>(rep.optimizer);
    SimplexProblem prob;
    for (std::size_t c = 0; c < grid.size(); ++c) prob.fiber_of_cell.push_back(*bins.grid().locate(g(grid.center(c))));
    prob.target = bins.cell_masses();
    const auto md = mirror_descent_simplex(prob, 1000, 0.5);
    for (std::size_t c = 0; c < grid.size(); ++c) {
      CHECK(std::abs(opt.cell_mass(c) - md.masses[c]) <= 1e-10);
      CHECK(opt.value(c) == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK(rep.diagnostics.at("constraint_l1") <= 1e-12);
  }
  SUBCASE("data outside the range is rejected") {
    const auto g = offset_polar_map();
    const GridSpec grid(Box(v2(0, 0), v2(2, 2)), {40, 40});
    const auto wide = normalize(GridMeasure(GridSpec(Box(v1(0.0), v1(2.0)), {10}), std::vector<double>(10, 1.0)));
    CHECK(code_of([&] { entropy_solution(g, grid, wide); }) == ErrorCode::RangeMismatch);
  }
}

TEST_CASE("least-norm map and moment solution") {
  Matrix a(2, 3);
  a << 1, 0, 1, 0, 1, 1;
  const Vector y = v2(0.7, -1.1);
  CHECK((least_norm_map(linear_map(a), y) - pseudoinverse(a) * y).norm() < 1e-14);
  CHECK((least_norm_map(linear_map(a), y) - a.transpose() * (a * a.transpose()).inverse() * y).norm() < 1e-12);

  const auto data = cloud(5, 25, 2);
  const auto rep = moment_solution(linear_map(a), data);
  const auto& opt = std::get<ParticleMeasure>(rep.optimizer);
  const Matrix expect = (pseudoinverse(a) * data.points().transpose()).transpose();
  CHECK((opt.points() - expect).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rep.objective == doctest::Approx(moment(opt, 2.0)));

  const auto same = moment_solution(identity_map(2), data);
  CHECK((std::get<ParticleMeasure>(same.optimizer).points() - data.points()).norm() < 1e-14);

  Matrix r(3, 1);
  r << 0.0, 0.5, 1.0;
  const auto diag = moment_solution(offset_polar_map(), ParticleMeasure::uniform(r));
  const auto& d = std::get<ParticleMeasure>(diag.optimizer);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(d.point(i)[0] - d.point(i)[1]) <= 1e-6);

  Matrix far(1, 1);
  far << 1.5;
  CHECK(code_of([&] { moment_solution(offset_polar_map(), ParticleMeasure::uniform(far)); }) == ErrorCode::EmptyFiber);
}

TEST_CASE("regularized entropy solution") {
  const auto g = offset_polar_map();
  const GridSpec grid(Box(v2(0, 0), v2(2, 2)), {60, 60});
  const auto bins = uniform_bins(12);
  SUBCASE("uniform prior without regularization equals the entropy solution") {
    RegularizationConfig cfg;
    cfg.alpha = 0.0;
    cfg.prior = normalize(GridMeasure::from_density(grid, g.theta(), [](const Vector&) { return 1.0; }));
    const auto reg = std::get<GridMeasure>(reg_entropy_solution(g, grid, bins, cfg).optimizer);
    const auto ent = std::get<GridMeasure>(entropy_solution(g, grid, bins).optimizer);
    for (std::size_t c = 0; c < grid.size(); ++c) CHECK(std::abs(reg.value(c) - ent.value(c)) <= 1e-8);
  }
  SUBCASE("ratio to the prior is constant on fibers") {
    RegularizationConfig cfg;
    cfg.alpha = 1.0;
    cfg.prior = normalize(
        GridMeasure::from_density(grid, g.theta(), [](const Vector& x) { return std::exp(-0.5 * x.squaredNorm()); }));
    const auto rep = reg_entropy_solution(g, grid, bins, cfg);
    const auto& opt = std::get<GridMeasure>(rep.optimizer);
    std::vector<double> s(12, 0), s2(12, 0), n(12, 0);
    for (std::size_t c = 0; c < grid.size(); ++c) {
      if (!opt.masked(c)) continue;
      const auto b = bins.grid().locate(g(grid.center(c)));
      if (!b) continue;
      const double ratio = opt.value(c) / cfg.prior->value(c);
      s[*b] += ratio;
      s2[*b] += ratio * ratio;
      n[*b] += 1;
    }
    for (std::size_t b = 0; b < 12; ++b) {
      if (n[b] < 2) continue;
      const double mean = s[b] / n[b];
      const double var = std::max(0.0, s2[b] / n[b] - mean * mean);
      CHECK(std::sqrt(var) / mean < 1e-6);
    }
  }
  SUBCASE("prior vanishing on a fiber") {
    RegularizationConfig cfg;
    cfg.alpha = 1.0;
    cfg.prior = normalize(GridMeasure::from_density(
        grid, g.theta(), [](const Vector& x) { return std::hypot(x[0] - 1, x[1] - 1) < 0.5 ? 1.0 : 0.0; }));
    CHECK(code_of([&] { reg_entropy_solution(g, grid, bins, cfg); }) == ErrorCode::PriorVanishes);
  }
}

TEST_CASE("regularized Wasserstein solution") {
  const auto g = offset_polar_map().with_domain(Domain::box(v2(0, 0), v2(2, 2)));
  RegularizationConfig cfg;
  cfg.alpha = 1.0;
  const auto rep = reg_wp_solution(g, ParticleMeasure::dirac(v1(std::numbers::sqrt2 / 2)), cfg);
  const auto& opt = std::get<ParticleMeasure>(rep.optimizer);
  // 1-D quadratic oracle along the diagonal: minimize (√2(1−t) − r)² + 2αt².
  const double r = std::numbers::sqrt2 / 2;
  const Vector t = grid_argmin_oracle(
      [&](const Vector& s) {
        const double a = std::numbers::sqrt2 * (1 - s[0]) - r;
        return a * a + 2 * cfg.alpha * s[0] * s[0];
      },
      Domain::box(v1(0), v1(1)), 100001);
  CHECK((opt.point(0) - v2(t[0], t[0])).norm() <= 1e-4);
  CHECK((opt.point(0) - v2(0.25, 0.25)).norm() <= 1e-6);

  Matrix a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  const auto data = cloud(6, 20, 3);
  cfg.alpha = 0.3;
  const auto lin = reg_wp_solution(linear_map(a), data, cfg);
  const Matrix expect = (tikhonov_inverse(a, 0.3) * data.points().transpose()).transpose();
  CHECK((std::get<ParticleMeasure>(lin.optimizer).points() - expect).cwiseAbs().maxCoeff() < 1e-12);

  cfg.alpha = 1e-4;
  Matrix pts(4, 2);
  pts << 0.1, 0.2, -0.3, 0.4, 0.5, 0.1, 0.0, -0.6;
  const auto near = reg_wp_solution(polar_map(), ParticleMeasure::uniform(pts), cfg);
  CHECK(near.objective < 1e-3);
  CHECK(reg_inversion_map(polar_map(), v2(0.1, 0.2), RegularizationConfig{}) ==
        inversion_map(polar_map(), v2(0.1, 0.2)));
}

TEST_CASE("augmented objective identity") {
  SUBCASE("dirac case") {
    const Vector a = v2(0.6, -0.8);
    RegularizationConfig cfg;
    cfg.alpha = 1.0;
    const auto chk = augmented_objective_identity_check(identity_map(2), ParticleMeasure::dirac(a),
                                                        ParticleMeasure::dirac(v2(0, 0)), cfg);
    CHECK(chk.lhs == doctest::Approx(2 * a.squaredNorm()));
    CHECK(chk.rhs == doctest::Approx(2 * a.squaredNorm()));
  }
  SUBCASE("random five-point instances against the permutation oracle") {
    Matrix two = 2.0 * Matrix::Identity(2, 2);
    const auto g = linear_map(two);
    RegularizationConfig cfg;
    cfg.alpha = 0.3;
    for (int trial = 0; trial < 20; ++trial) {
      const auto x = cloud(100 + trial, 5, 2);
      const auto y = cloud(200 + trial, 5, 2);
      const auto chk = augmented_objective_identity_check(g, x, y, cfg);
      CHECK(std::abs(chk.lhs - chk.rhs) <= 1e-9);
      const auto gx = pushforward(g, x);
      const double rhs_oracle = brute_force_ot(gx, y, cost_matrix(gx.points(), y.points(), 2.0)).objective +
                                cfg.alpha * moment(x, 2.0);
      CHECK(std::abs(chk.rhs - rhs_oracle) <= 1e-10);
    }
  }
  SUBCASE("no regularization") {
    const auto x = cloud(7, 4, 2);
    const auto y = cloud(8, 4, 2);
    const auto chk = augmented_objective_identity_check(polar_map(), x, y, RegularizationConfig{});
    const double w = transport_cost(pushforward(polar_map(), x), y, 2.0);
    CHECK(chk.lhs == doctest::Approx(w).epsilon(1e-12));
    CHECK(chk.rhs == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("Tikhonov bound") {
  Matrix a(1, 1);
  a << 2;
  // Scalar oracle: argmin |2x − y|² + x² is x = 0.4 y; the pseudoinverse is 0.5.
  const Vector x = grid_argmin_oracle([](const Vector& s) { return (2 * s[0] - 1) * (2 * s[0] - 1) + s[0] * s[0]; },
                                      Domain::box(v1(-1), v1(1)), 200001);
  CHECK(x[0] == doctest::Approx(0.4).epsilon(1e-5));
  const auto b = tikhonov_bound(a, 1.0, 0.3, 4.0);
  CHECK(b.bound_full == doctest::Approx(0.4 * 0.3 + 0.1 * 2.0));
  CHECK(b.bound_full <= b.bound_simplified + 1e-12);
  CHECK(tikhonov_bound(a, 0.25, 1.0, 1.0).noise_coefficient_simplified == 1.0);
  const auto tiny = tikhonov_bound(a, 1e-12, 0.0, 1.0);
  CHECK(tiny.bound_full < 1e-10);
  CHECK(tiny.bound_simplified < 1e-10);
  Matrix rank1(2, 2);
  rank1 << 1, 2, 2, 4;
  CHECK(code_of([&] { tikhonov_bound(rank1, 1.0, 0.0, 1.0); }) == ErrorCode::RankDeficient);
  CHECK_THROWS_AS(tikhonov_bound(a, 0.0, 0.0, 1.0), Error);
}
