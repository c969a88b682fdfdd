#include "minv/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "minv/error.hpp"

namespace minv {

namespace {

constexpr double kRangeMismatchLimit = 0.01;

std::string ot_label(const OtMethod& m) {
  if (m.kind == OtMethod::Kind::Exact) return "exact";
  std::ostringstream os;
  os << "sinkhorn:" << m.epsilon;
  return os.str();
}

// W_p^p between G#ρx (points `images`) and ρy, together with the label of the method used.
std::pair<double, std::string> data_fit(const ParticleMeasure& images, const ParticleMeasure& rho_y, double p,
                                        const TransportOptions& opts, std::map<std::string, double>& diag) {
  double identity = 0.0;
  for (std::size_t i = 0; i < rho_y.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    identity += rho_y.weight(i) * std::pow((images.points().row(r) - rho_y.points().row(r)).norm(), p);
  }
  diag["identity_coupling_cost"] = identity;
  if (opts.force) {
    const double c = transport_cost(images, rho_y, p, *opts.force);
    return {c, ot_label(*opts.force)};
  }
  if (rho_y.size() <= opts.exact_limit) {
    const double c = transport_cost(images, rho_y, p, OtMethod::exact());
    diag["exact_ot_cost"] = c;
    return {c, "exact"};
  }
  return {identity, "identity-coupling"};
}

std::vector<double> masked_cell_masses(const GridMeasure& m) {
  std::vector<double> out(m.size(), 0.0);
  for (std::size_t c = 0; c < m.size(); ++c) {
    if (m.masked(c)) out[c] = m.cell_mass(c);
  }
  return out;
}

struct Fibers {
  std::vector<char> mask;
  std::vector<long> bin_of_cell;  // -1: masked out or image outside the bins
  std::size_t outside = 0;
};

Fibers assign_fibers(const ForwardMap& g, const GridSpec& theta_grid, const GridSpec& bins) {
  if (theta_grid.dim() != g.in_dim()) throw Error(ErrorCode::DimensionMismatch, "parameter grid differs from map input dimension");
  if (bins.dim() != g.out_dim()) throw Error(ErrorCode::DimensionMismatch, "data bins differ from map output dimension");
  Fibers f;
  f.mask = theta_grid.mask_for(g.theta());
  f.bin_of_cell.assign(theta_grid.size(), -1);
  for (std::size_t c = 0; c < theta_grid.size(); ++c) {
    if (!f.mask[c]) continue;
    const auto b = bins.locate(g(theta_grid.center(c)));
    if (b) {
      f.bin_of_cell[c] = static_cast<long>(*b);
    } else {
      ++f.outside;
    }
  }
  return f;
}

double kl_masses(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) s += p[i] * std::log(p[i] / q[i]);
  }
  return s;
}

}  // namespace

std::string_view to_string(Formulation f) {
  switch (f) {
    case Formulation::Conditional: return "conditional";
    case Formulation::Marginal: return "marginal";
    case Formulation::Entropy: return "entropy";
    case Formulation::Moment: return "moment";
    case Formulation::RegEntropy: return "reg-entropy";
    case Formulation::RegWasserstein: return "reg-wp";
  }
  return "unknown";
}

void RegularizationConfig::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error(ErrorCode::InvalidArgument, "reg.alpha must be finite and >= 0");
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidArgument, "reg.p must be finite and >= 1");
  if (prior && !prior->is_normalized(1e-8)) throw Error(ErrorCode::InvalidMeasure, "prior must be normalized");
}

RegionPredicate range_predicate(const ForwardMap& g, double tol) {
  switch (g.kind()) {
    case MapKind::Polar:
      if (g.theta().kind() == Domain::Kind::Box && g.theta().bounding_box().upper[0] == 1.0 &&
          g.theta().bounding_box().volume() >= 2.0 * std::numbers::pi) {
        return [tol](const Vector& y) { return y.norm() <= 1.0 + tol; };
      }
      break;
    case MapKind::OffsetPolar:
      if (g.theta().kind() == Domain::Kind::Ball) {
        return [tol](const Vector& y) { return y[0] >= -tol && y[0] <= 1.0 + tol; };
      }
      break;
    case MapKind::Linear:
      if (!g.theta().bounded()) {
        const Matrix a = g.matrix();
        const Matrix proj = a * pseudoinverse(a);
        return [proj, tol](const Vector& y) { return (proj * y - y).norm() <= tol * (1.0 + y.norm()); };
      }
      break;
    default:
      break;
  }
  auto solver = std::make_shared<PointwiseSolver>(g);
  const double t = std::max(tol, 1e-7);
  return [solver, t](const Vector& y) { return (solver->project(y) - y).norm() <= t * (1.0 + y.norm()); };
}

Vector inversion_map(const ForwardMap& g, const Vector& y, double metric_p) {
  if (!(metric_p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "metric exponent must be >= 1");
  return PointwiseSolver(g).invert(y);  // any d^p shares the argmin of d²
}

Vector projection(const ForwardMap& g, const Vector& y, double metric_p) { return g(inversion_map(g, y, metric_p)); }

Vector least_norm_map(const ForwardMap& g, const Vector& y) { return PointwiseSolver(g).least_norm(y); }

Vector reg_inversion_map(const ForwardMap& g, const Vector& y, const RegularizationConfig& cfg) {
  cfg.validate();
  return PointwiseSolver(g).regularized(y, cfg.alpha, cfg.p);
}

namespace {

ParticleMeasure pull_back(const PointwiseSolver& solver, const Matrix& pts, const std::vector<double>& weights,
                          double& max_residual) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) keep.push_back(i);
  }
  Matrix xs(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(solver.map().in_dim()));
  Vector w(static_cast<Eigen::Index>(keep.size()));
  max_residual = 0.0;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const Vector y = pts.row(static_cast<Eigen::Index>(keep[k])).transpose();
    const Vector x = solver.invert(y);
    max_residual = std::max(max_residual, (solver.map()(x) - y).norm());
    xs.row(static_cast<Eigen::Index>(k)) = x.transpose();
    w[static_cast<Eigen::Index>(k)] = weights[keep[k]];
  }
  return ParticleMeasure(std::move(xs), std::move(w));
}

void conditional_diagnostics(SolveReport& rep, const PhiKind& kind, double nu1) {
  rep.diagnostics["range_mass"] = nu1;
  rep.diagnostics["representative_nonunique"] = 1.0;
  if (std::isfinite(kind.at_zero())) {
    const double bound = jensen_lower_bound(kind, nu1);
    rep.diagnostics["jensen_bound"] = bound;
    rep.diagnostics["jensen_gap"] = rep.objective - bound;
  }
}

}  // namespace

SolveReport conditional_reconstruction(const ForwardMap& g, const ParticleMeasure& rho_y,
                                       const RegionPredicate& range, const PhiKind& kind) {
  if (rho_y.dim() != g.out_dim()) throw Error(ErrorCode::DimensionMismatch, "data dimension differs from map output");
  const ParticleMeasure data = normalize(rho_y);
  const double nu1 = region_mass(data, range);
  if (!(nu1 > 0.0)) throw Error(ErrorCode::EmptyRangeMass, "data carries no mass on the range");
  ParticleMeasure cond = condition(data, range);

  SolveReport rep;
  rep.method = Formulation::Conditional;
  rep.objective = phi_divergence(cond, data, kind);
  PointwiseSolver solver(g);
  std::vector<double> w(cond.weights().data(), cond.weights().data() + cond.size());
  double residual = 0.0;
  rep.optimizer = pull_back(solver, cond.points(), w, residual);
  rep.pushforward_of_optimizer = std::move(cond);
  rep.diagnostics["max_pullback_residual"] = residual;
  conditional_diagnostics(rep, kind, nu1);
  return rep;
}

SolveReport conditional_reconstruction(const ForwardMap& g, const GridMeasure& rho_y, const RegionPredicate& range,
                                       const PhiKind& kind) {
  if (rho_y.grid().dim() != g.out_dim()) throw Error(ErrorCode::DimensionMismatch, "data dimension differs from map output");
  const GridMeasure data = normalize(rho_y);
  const double nu1 = region_mass(data, range);
  if (!(nu1 > 0.0)) throw Error(ErrorCode::EmptyRangeMass, "data carries no mass on the range");
  GridMeasure cond = condition(data, range);

  SolveReport rep;
  rep.method = Formulation::Conditional;
  rep.objective = phi_divergence(cond, data, kind);
  PointwiseSolver solver(g);
  const auto& grid = cond.grid();
  Matrix centers(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(grid.dim()));
  for (std::size_t c = 0; c < grid.size(); ++c) centers.row(static_cast<Eigen::Index>(c)) = grid.center(c).transpose();
  double residual = 0.0;
  rep.optimizer = pull_back(solver, centers, masked_cell_masses(cond), residual);
  rep.pushforward_of_optimizer = std::move(cond);
  rep.diagnostics["max_pullback_residual"] = residual;
  conditional_diagnostics(rep, kind, nu1);
  return rep;
}

SolveReport marginal_reconstruction(const ForwardMap& g, const ParticleMeasure& rho_y, double p,
                                    const TransportOptions& opts) {
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "p must be >= 1");
  if (rho_y.dim() != g.out_dim()) throw Error(ErrorCode::DimensionMismatch, "data dimension differs from map output");
  const ParticleMeasure data = normalize(rho_y);
  PointwiseSolver solver(g, opts.argmin);
  Matrix xs(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(g.in_dim()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    xs.row(static_cast<Eigen::Index>(i)) = solver.invert(data.point(i)).transpose();
  }
  ParticleMeasure opt(std::move(xs), data.weights());
  ParticleMeasure push = pushforward(g, opt);

  SolveReport rep;
  rep.method = Formulation::Marginal;
  auto [cost, label] = data_fit(push, data, p, opts, rep.diagnostics);
  rep.objective = std::pow(cost, 1.0 / p);
  rep.ot_method = label;
  rep.diagnostics["closed_form"] = solver.closed_form() ? 1.0 : 0.0;
  rep.optimizer = std::move(opt);
  rep.pushforward_of_optimizer = std::move(push);
  return rep;
}

LevelSetMass level_set_mass(const ForwardMap& g, const GridSpec& theta_grid, const Vector& y, double h,
                            const GridMeasure* weight) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "bandwidth must be positive");
  if (theta_grid.dim() != g.in_dim()) throw Error(ErrorCode::DimensionMismatch, "parameter grid differs from map input dimension");
  if (weight && !(weight->grid() == theta_grid)) throw Error(ErrorCode::DimensionMismatch, "weight lives on a different grid");
  const auto mask = theta_grid.mask_for(g.theta());
  const double cell = theta_grid.cell_volume();
  const double hn = std::pow(h, static_cast<double>(g.out_dim()));
  double vol = 0.0;
  double weight_sum = 0.0;
  std::size_t masked = 0;
  for (std::size_t c = 0; c < theta_grid.size(); ++c) {
    if (!mask[c]) continue;
    const double w = weight ? weight->value(c) : 1.0;
    weight_sum += w;
    ++masked;
    const Vector d = g(theta_grid.center(c)) - y;
    if (d.cwiseAbs().maxCoeff() < 0.5 * h) vol += w * cell;
  }
  // One cell's worth of band, at the mean weight.
  const double ref = masked ? weight_sum / static_cast<double>(masked) : 1.0;
  const double floor = cell * ref / hn;
  LevelSetMass out{vol / hn, false};
  if (out.value < floor) {
    out.value = floor;
    out.floored = true;
  }
  return out;
}

SolveReport entropy_solution(const ForwardMap& g, const GridSpec& theta_grid, const GridMeasure& rho_y) {
  const GridSpec& bins = rho_y.grid();
  const Fibers f = assign_fibers(g, theta_grid, bins);
  const double cell = theta_grid.cell_volume();
  const double hn = bins.cell_volume();
  const auto target = masked_cell_masses(normalize(rho_y));

  std::vector<double> fiber_volume(bins.size(), 0.0);
  for (std::size_t c = 0; c < theta_grid.size(); ++c) {
    if (f.bin_of_cell[c] >= 0) fiber_volume[static_cast<std::size_t>(f.bin_of_cell[c])] += cell;
  }
  double unrepresented = 0.0;
  std::size_t fibers = 0;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (target[b] > 0.0 && fiber_volume[b] == 0.0) unrepresented += target[b];
    if (fiber_volume[b] > 0.0) ++fibers;
  }
  if (unrepresented > kRangeMismatchLimit) {
    throw Error(ErrorCode::RangeMismatch, "data has mass " + std::to_string(unrepresented) + " outside G(theta)");
  }

  // ρ(x) = ρy(G(x)) / L(G(x)) with L the level-set mass of the fiber (fiber volume over h^n).
  const double floor = cell / hn;
  std::size_t floor_hits = 0;
  std::vector<double> values(theta_grid.size(), 0.0);
  for (std::size_t c = 0; c < theta_grid.size(); ++c) {
    if (f.bin_of_cell[c] < 0) continue;
    const auto b = static_cast<std::size_t>(f.bin_of_cell[c]);
    double level = fiber_volume[b] / hn;
    if (level < floor) {
      level = floor;
      ++floor_hits;
    }
    values[c] = (target[b] / hn) / level;
  }
  GridMeasure opt = normalize(GridMeasure(theta_grid, std::move(values), f.mask));
  GridMeasure push = pushforward_grid(g, opt, bins);

  SolveReport rep;
  rep.method = Formulation::Entropy;
  rep.objective = entropy(opt);
  double l1 = 0.0;
  const auto pushed = push.cell_masses();
  for (std::size_t b = 0; b < bins.size(); ++b) l1 += std::abs(pushed[b] - target[b]);
  rep.diagnostics["constraint_l1"] = l1;
  rep.diagnostics["level_set_floor_hits"] = static_cast<double>(floor_hits);
  rep.diagnostics["unrepresented_mass"] = unrepresented;
  rep.diagnostics["fibers"] = static_cast<double>(fibers);
  rep.diagnostics["cells_outside_bins"] = static_cast<double>(f.outside);
  rep.optimizer = std::move(opt);
  rep.pushforward_of_optimizer = std::move(push);
  return rep;
}

SolveReport moment_solution(const ForwardMap& g, const ParticleMeasure& rho_y, const ArgminOptions& opts) {
  if (rho_y.dim() != g.out_dim()) throw Error(ErrorCode::DimensionMismatch, "data dimension differs from map output");
  const ParticleMeasure data = normalize(rho_y);
  PointwiseSolver solver(g, opts);
  Matrix xs(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(g.in_dim()));
  double residual = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Vector x;
    try {
      x = solver.least_norm(data.point(i));
    } catch (const Error& e) {
      throw Error(e.code(), "data point " + std::to_string(i) + ": " + e.what());
    }
    residual = std::max(residual, (g(x) - data.point(i)).norm());
    xs.row(static_cast<Eigen::Index>(i)) = x.transpose();
  }
  ParticleMeasure opt(std::move(xs), data.weights());

  SolveReport rep;
  rep.method = Formulation::Moment;
  rep.objective = moment(opt, 2.0);
  rep.diagnostics["max_fiber_residual"] = residual;
  rep.diagnostics["fiber_tolerance"] = solver.fiber_tolerance();
  rep.pushforward_of_optimizer = pushforward(g, opt);
  rep.optimizer = std::move(opt);
  return rep;
}

SolveReport reg_entropy_solution(const ForwardMap& g, const GridSpec& theta_grid, const GridMeasure& rho_y,
                                 const RegularizationConfig& cfg) {
  cfg.validate();
  if (!cfg.prior) throw Error(ErrorCode::InvalidArgument, "reg-entropy needs a prior");
  if (!(cfg.prior->grid() == theta_grid)) throw Error(ErrorCode::DimensionMismatch, "prior lives on a different grid");
  const GridSpec& bins = rho_y.grid();
  const Fibers f = assign_fibers(g, theta_grid, bins);
  const auto target = masked_cell_masses(normalize(rho_y));

  // Restrict 𝓜 to Θ and renormalize.
  std::vector<double> prior(theta_grid.size(), 0.0);
  double prior_total = 0.0;
  for (std::size_t c = 0; c < theta_grid.size(); ++c) {
    if (f.mask[c]) prior_total += (prior[c] = cfg.prior->value(c)) * theta_grid.cell_volume();
  }
  if (!(prior_total > 0.0)) throw Error(ErrorCode::PriorVanishes, "prior has no mass on theta");
  for (auto& v : prior) v /= prior_total;

  std::vector<double> fiber_prior(bins.size(), 0.0);
  std::vector<double> fiber_volume(bins.size(), 0.0);
  for (std::size_t c = 0; c < theta_grid.size(); ++c) {
    if (f.bin_of_cell[c] < 0) continue;
    const auto b = static_cast<std::size_t>(f.bin_of_cell[c]);
    fiber_prior[b] += prior[c] * theta_grid.cell_volume();
    fiber_volume[b] += theta_grid.cell_volume();
  }
  double unrepresented = 0.0;
  for (std::size_t b = 0; b < bins.size(); ++b) {
    if (target[b] <= 0.0) continue;
    if (fiber_volume[b] == 0.0) {
      unrepresented += target[b];
    } else if (!(fiber_prior[b] > 0.0)) {
      throw Error(ErrorCode::PriorVanishes, "prior vanishes on the fiber of data bin " + std::to_string(b));
    }
  }
  if (unrepresented > kRangeMismatchLimit) {
    throw Error(ErrorCode::RangeMismatch, "data has mass " + std::to_string(unrepresented) + " outside G(theta)");
  }

  const double expo = 1.0 / (1.0 + cfg.alpha);
  std::vector<double> values(theta_grid.size(), 0.0);
  for (std::size_t c = 0; c < theta_grid.size(); ++c) {
    if (f.bin_of_cell[c] < 0) continue;
    const auto b = static_cast<std::size_t>(f.bin_of_cell[c]);
    if (target[b] > 0.0) values[c] = prior[c] * std::pow(target[b] / fiber_prior[b], expo);
  }
  GridMeasure opt = normalize(GridMeasure(theta_grid, std::move(values), f.mask));
  GridMeasure push = pushforward_grid(g, opt, bins);

  const auto pushed = push.cell_masses();
  const auto opt_mass = opt.cell_masses();
  std::vector<double> prior_mass(prior.size());
  for (std::size_t c = 0; c < prior.size(); ++c) prior_mass[c] = prior[c] * theta_grid.cell_volume();
  const double fit = kl_masses(pushed, target);
  const double reg = kl_masses(opt_mass, prior_mass);

  SolveReport rep;
  rep.method = Formulation::RegEntropy;
  rep.objective = fit + cfg.alpha * reg;
  double l1 = 0.0;
  for (std::size_t b = 0; b < bins.size(); ++b) l1 += std::abs(pushed[b] - target[b]);
  rep.diagnostics["data_kl"] = fit;
  rep.diagnostics["prior_kl"] = reg;
  rep.diagnostics["constraint_l1"] = l1;
  rep.diagnostics["unrepresented_mass"] = unrepresented;
  rep.diagnostics["level_set_floor_hits"] = 0.0;
  rep.optimizer = std::move(opt);
  rep.pushforward_of_optimizer = std::move(push);
  return rep;
}

SolveReport reg_wp_solution(const ForwardMap& g, const ParticleMeasure& rho_y, const RegularizationConfig& cfg,
                            const TransportOptions& opts) {
  cfg.validate();
  if (rho_y.dim() != g.out_dim()) throw Error(ErrorCode::DimensionMismatch, "data dimension differs from map output");
  const ParticleMeasure data = normalize(rho_y);
  PointwiseSolver solver(g, opts.argmin);
  Matrix xs(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(g.in_dim()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    xs.row(static_cast<Eigen::Index>(i)) = solver.regularized(data.point(i), cfg.alpha, cfg.p).transpose();
  }
  ParticleMeasure opt(std::move(xs), data.weights());
  ParticleMeasure push = pushforward(g, opt);

  SolveReport rep;
  rep.method = Formulation::RegWasserstein;
  auto [cost, label] = data_fit(push, data, cfg.p, opts, rep.diagnostics);
  const double mom = moment(opt, cfg.p);
  rep.objective = cost + cfg.alpha * mom;
  rep.ot_method = label;
  rep.diagnostics["data_cost"] = cost;
  rep.diagnostics["moment"] = mom;
  rep.diagnostics["closed_form"] = solver.closed_form() ? 1.0 : 0.0;
  rep.optimizer = std::move(opt);
  rep.pushforward_of_optimizer = std::move(push);
  return rep;
}

IdentityCheck augmented_objective_identity_check(const ForwardMap& g, const ParticleMeasure& rho_x,
                                                 const ParticleMeasure& rho_y, const RegularizationConfig& cfg) {
  cfg.validate();
  const ForwardMap ga = augment(g, cfg.alpha, cfg.p);
  Matrix padded = Matrix::Zero(rho_y.points().rows(), static_cast<Eigen::Index>(ga.out_dim()));
  padded.leftCols(rho_y.points().cols()) = rho_y.points();
  const ParticleMeasure rho_bar(std::move(padded), rho_y.weights());

  IdentityCheck out;
  out.lhs = transport_cost(pushforward(ga, rho_x), rho_bar, cfg.p, OtMethod::exact());
  out.rhs = transport_cost(pushforward(g, rho_x), rho_y, cfg.p, OtMethod::exact()) + cfg.alpha * moment(rho_x, cfg.p);
  return out;
}

TikhonovBound tikhonov_bound(const Matrix& a, double alpha, double w2_noise, double second_moment_true) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be > 0");
  if (!(w2_noise >= 0.0) || !(second_moment_true >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "noise level and second moment must be >= 0");
  }
  const std::size_t full = static_cast<std::size_t>(std::min(a.rows(), a.cols()));
  if (numerical_rank(a) < full) throw Error(ErrorCode::RankDeficient, "matrix is not of full rank");

  const auto spectral = [](const Matrix& m) { return Eigen::JacobiSVD<Matrix>(m).singularValues()(0); };
  const Matrix t = tikhonov_inverse(a, alpha);
  const Matrix pinv = pseudoinverse(a);
  const double sigma_m = Eigen::JacobiSVD<Matrix>(a).singularValues()(static_cast<Eigen::Index>(full) - 1);

  TikhonovBound b;
  b.noise_coefficient_full = spectral(t);
  b.bias_coefficient_full = spectral(t - pinv);
  b.noise_coefficient_simplified = 1.0 / (2.0 * std::sqrt(alpha));
  b.bias_coefficient_simplified = alpha / (sigma_m * (sigma_m * sigma_m + alpha));
  const double root_m2 = std::sqrt(second_moment_true);
  b.bound_full = b.noise_coefficient_full * w2_noise + b.bias_coefficient_full * root_m2;
  b.bound_simplified = b.noise_coefficient_simplified * w2_noise + b.bias_coefficient_simplified * root_m2;
  return b;
}

}  // namespace minv
