#include <algorithm>
#include <cmath>
#include <numbers>

#include "minv/cli/cli.hpp"
#include "minv/error.hpp"
#include "minv/oracles.hpp"

namespace minv::cli {

namespace {

// Σ|ρ − ρ*| / Σ|ρ*| over the masked cells accepted by `keep`.
double rel_l1(const GridMeasure& m, const std::function<double(const Vector&)>& exact,
              const std::function<bool(std::size_t)>& keep) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t c = 0; c < m.size(); ++c) {
    if (!m.masked(c) || !keep(c)) continue;
    const double e = exact(m.grid().center(c));
    num += std::abs(m.value(c) - e);
    den += std::abs(e);
  }
  return den > 0.0 ? num / den : 0.0;
}

// Largest coefficient of variation of m/weight over the cells sharing a data bin.
double max_fiber_cv(const ForwardMap& g, const GridMeasure& m, const GridSpec& bins, const GridMeasure* weight) {
  std::vector<std::vector<double>> ratios(bins.size());
  for (std::size_t c = 0; c < m.size(); ++c) {
    if (!m.masked(c)) continue;
    const auto b = bins.locate(g(m.grid().center(c)));
    if (b) ratios[*b].push_back(weight ? m.value(c) / weight->value(c) : m.value(c));
  }
  double worst = 0.0;
  for (const auto& r : ratios) {
    if (r.size() < 2) continue;
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    if (!(mean > 0.0)) continue;
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    worst = std::max(worst, std::sqrt(var / static_cast<double>(r.size())) / mean);
  }
  return worst;
}

double max_map_error(const ParticleMeasure& data, const ParticleMeasure& opt,
                     const std::function<Vector(const Vector&)>& exact) {
  double worst = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    worst = std::max(worst, (opt.point(i) - exact(data.point(i))).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<double> radius_grid() {
  std::vector<double> r;
  for (int k = 0; k <= 10; ++k) r.push_back(0.1 * k);
  return r;
}

Vector scalar(double v) {
  Vector y(1);
  y[0] = v;
  return y;
}

void polar_checks(const Fixture& f, std::vector<Check>& out) {
  const auto range = range_predicate(f.map);
  const auto grid_rep = conditional_reconstruction(f.map, *f.grid_data, range, PhiKind::kl());
  const auto& cond = std::get<GridMeasure>(grid_rep.pushforward_of_optimizer);
  out.push_back({"conditional_rel_l1",
                 rel_l1(cond, f.analytic_density, [&](std::size_t c) { return cond.grid().center(c).norm() <= 1.0; }),
                 f.tolerance.at("conditional_rel_l1")});
  out.push_back({"kl_objective", std::abs(grid_rep.objective - std::log(2.0)), f.tolerance.at("kl_objective")});

  const auto part_rep = conditional_reconstruction(f.map, *f.particles, range, PhiKind::kl());
  out.push_back({"jensen_gap", std::abs(part_rep.diagnostics.at("jensen_gap")), 1e-10});

  const auto marg = marginal_reconstruction(f.map, *f.particles, 2.0);
  const auto& push = std::get<ParticleMeasure>(marg.pushforward_of_optimizer);
  double ring = 0.0;
  double fixed = 0.0;
  for (std::size_t i = 0; i < push.size(); ++i) {
    const Vector y = f.particles->point(i);
    if (y.norm() > 1.0) {
      ring = std::max(ring, std::abs(push.point(i).norm() - 1.0));
    } else {
      fixed = std::max(fixed, (push.point(i) - y).norm());
    }
  }
  out.push_back({"projection_radius", ring, f.tolerance.at("projection_radius")});
  out.push_back({"disc_fixed_points", fixed, 1e-9});
}

void offset_polar_checks(const Fixture& f, const FixtureOptions& opts, std::vector<Check>& out) {
  const auto rep = entropy_solution(f.map, *f.theta_grid, *f.grid_data);
  const auto& opt = std::get<GridMeasure>(rep.optimizer);
  out.push_back({"entropy_rel_l1", rel_l1(opt, f.analytic_density, [](std::size_t) { return true; }),
                 f.tolerance.at("entropy_rel_l1")});
  out.push_back({"fiber_cv", max_fiber_cv(f.map, opt, f.grid_data->grid(), nullptr), f.tolerance.at("fiber_cv")});
  out.push_back({"constraint_l1", rep.diagnostics.at("constraint_l1"), 2.0 / static_cast<double>(opts.bins)});

  PointwiseSolver solver(f.map);
  double ln = 0.0;
  for (double r : radius_grid()) {
    ln = std::max(ln, (solver.least_norm(scalar(r)) - f.analytic_map(scalar(r))).norm());
  }
  out.push_back({"least_norm_max_error", ln, f.tolerance.at("least_norm_max_error")});

  const auto moment = moment_solution(f.map, *f.particles);
  const auto& pts = std::get<ParticleMeasure>(moment.optimizer).points();
  out.push_back({"moment_diagonal", (pts.col(0) - pts.col(1)).cwiseAbs().maxCoeff(), 1e-6});

  // Least norm never exceeds the norm of any preimage, checked on a coarse grid.
  const GridSpec coarse(Box(Vector::Zero(2), Vector::Constant(2, 2.0)), {40, 40});
  double excess = 0.0;
  for (std::size_t c = 0; c < coarse.size(); ++c) {
    const Vector x = coarse.center(c);
    if (!f.map.theta().contains(x)) continue;
    excess = std::max(excess, solver.least_norm(f.map(x)).squaredNorm() - x.squaredNorm());
  }
  out.push_back({"least_norm_dominance", std::max(0.0, excess), 1e-9});
}

void reg_kl_checks(const Fixture& f, std::vector<Check>& out) {
  const auto rep = reg_entropy_solution(f.map, *f.theta_grid, *f.grid_data, f.reg);
  const auto& opt = std::get<GridMeasure>(rep.optimizer);
  out.push_back({"reg_entropy_rel_l1", rel_l1(opt, f.analytic_density, [](std::size_t) { return true; }),
                 f.tolerance.at("reg_entropy_rel_l1")});
  double bessel = 0.0;
  for (int k = 0; k <= 8; ++k) {
    const double a = std::numbers::sqrt2 * k / 8.0;
    bessel = std::max(bessel, std::abs(bessel_i0(a) - bessel_i0_quadrature(a)) / bessel_i0(a));
  }
  out.push_back({"bessel_agreement", bessel, f.tolerance.at("bessel_agreement")});
  out.push_back({"prior_ratio_fiber_cv", max_fiber_cv(f.map, opt, f.grid_data->grid(), &*f.reg.prior), 1e-6});
}

void reg_w2_checks(const Fixture& f, std::vector<Check>& out) {
  const auto rep = reg_wp_solution(f.map, *f.particles, f.reg);
  const double tol = f.tolerance.at("reg_map_max_error");
  out.push_back(
      {"reg_map_max_error", max_map_error(*f.particles, std::get<ParticleMeasure>(rep.optimizer), f.analytic_map), tol});
  PointwiseSolver solver(f.map);
  double grid_err = 0.0;
  for (double r : radius_grid()) {
    const Vector y = scalar(r);
    grid_err = std::max(grid_err, (solver.regularized(y, f.reg.alpha, f.reg.p) - f.analytic_map(y)).norm());
  }
  out.push_back({"reg_map_radius_grid", grid_err, tol});
}

void linear_checks(const Fixture& f, const TransportOptions& transport, std::vector<Check>& out) {
  SolveReport rep;
  if (f.formulation == Formulation::Marginal) {
    rep = marginal_reconstruction(f.map, *f.particles, 2.0, transport);
  } else if (f.formulation == Formulation::Moment) {
    rep = moment_solution(f.map, *f.particles);
  } else {
    rep = reg_wp_solution(f.map, *f.particles, f.reg, transport);
  }
  out.push_back({"map_max_error",
                 max_map_error(*f.particles, std::get<ParticleMeasure>(rep.optimizer), f.analytic_map),
                 f.tolerance.at("map_max_error")});
}

}  // namespace

std::vector<Check> validate_fixture(const std::string& name, const FixtureOptions& opts,
                                    const TransportOptions& transport) {
  const Fixture f = make_fixture(name, opts);
  std::vector<Check> out;
  if (name == "polar-over") {
    polar_checks(f, out);
  } else if (name == "offset-polar-under") {
    offset_polar_checks(f, opts, out);
  } else if (name == "offset-polar-reg-kl") {
    reg_kl_checks(f, out);
  } else if (name == "offset-polar-reg-w2") {
    reg_w2_checks(f, out);
  } else {
    linear_checks(f, transport, out);
  }
  return out;
}

}  // namespace minv::cli
