#include "minv/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "minv/error.hpp"
#include "minv/oracles.hpp"
#include "minv/rng.hpp"

namespace minv {

namespace {

constexpr double kPi = std::numbers::pi;

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

GridSpec square_grid(double lo, double hi, std::size_t n) {
  return GridSpec(Box(vec2(lo, lo), vec2(hi, hi)), {n, n});
}

// Normalizing constant of a density on [0,1] by the midpoint rule.
double unit_interval_mass(const std::function<double(double)>& density) {
  constexpr int n = 20000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += density((i + 0.5) / n);
  return s / n;
}

// Normalizes f over the masked cells of a grid (midpoint rule).
std::function<double(const Vector&)> normalized_on(const GridSpec& grid, const Domain& theta,
                                                   std::function<double(const Vector&)> f) {
  const auto mask = grid.mask_for(theta);
  double z = 0.0;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (mask[c]) z += f(grid.center(c));
  }
  z *= grid.cell_volume();
  if (!(z > 0.0)) throw Error(ErrorCode::ZeroMass, "analytic density integrates to zero");
  return [f = std::move(f), z, theta](const Vector& x) { return theta.contains(x) ? f(x) / z : 0.0; };
}

Vector diagonal(double t) { return vec2(t, t); }

Fixture offset_polar_base(const std::string& name, const FixtureOptions& opts) {
  Fixture f{name, "", offset_polar_map()};
  f.theta_grid = square_grid(0.0, 2.0, opts.grid);
  f.analytic_map = [](const Vector& y) { return diagonal(1.0 - y[0] / std::numbers::sqrt2); };
  f.tolerance = {{"entropy_rel_l1", 0.05}, {"least_norm_max_error", 2e-3}, {"fiber_cv", 1e-6}};
  f.formulation = Formulation::Entropy;
  return f;
}

}  // namespace

ParticleMeasure quantile_samples(const std::function<double(double)>& density, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  constexpr std::size_t cells = 20000;
  std::vector<double> cdf(cells + 1, 0.0);
  for (std::size_t i = 0; i < cells; ++i) {
    const double v = density((static_cast<double>(i) + 0.5) / cells);
    if (!(v >= 0.0)) throw Error(ErrorCode::InvalidMeasure, "density must be nonnegative");
    cdf[i + 1] = cdf[i] + v;
  }
  if (!(cdf.back() > 0.0)) throw Error(ErrorCode::ZeroMass, "density has no mass on [0,1]");
  for (auto& c : cdf) c /= cdf.back();
  Matrix pts(static_cast<Eigen::Index>(n), 1);
  for (std::size_t k = 0; k < n; ++k) {
    const double q = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    const auto it = std::lower_bound(cdf.begin() + 1, cdf.end(), q);
    const auto i = static_cast<std::size_t>(it - cdf.begin()) - 1;
    const double t = (q - cdf[i]) / (cdf[i + 1] - cdf[i]);
    pts(static_cast<Eigen::Index>(k), 0) = (static_cast<double>(i) + t) / cells;
  }
  return ParticleMeasure::uniform(std::move(pts));
}

ParticleMeasure gaussian_particles(std::size_t n, std::size_t dim, std::uint64_t seed, const std::string& stream,
                                   double scale) {
  auto rng = make_rng(seed, stream);
  Matrix pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index j = 0; j < pts.cols(); ++j) pts(i, j) = scale * standard_normal(rng);
  }
  return ParticleMeasure::uniform(std::move(pts));
}

Fixture polar_overdetermined(const FixtureOptions& opts) {
  if (opts.samples < 2 || opts.grid < 2) throw Error(ErrorCode::InvalidArgument, "polar fixture needs >= 2 samples and grid cells");
  Fixture f{"polar-over", "half unit disc, half radius-2 circle; polar map onto the unit disc", polar_map()};
  f.formulation = Formulation::Conditional;

  const std::size_t n_disc = opts.samples / 2;
  const std::size_t n_ring = opts.samples - n_disc;
  Matrix pts(static_cast<Eigen::Index>(opts.samples), 2);
  auto rng = make_rng(opts.seed, "polar-over/disc");
  for (std::size_t i = 0; i < n_disc; ++i) {
    const double r = std::sqrt(uniform01(rng));
    const double th = 2.0 * kPi * uniform01(rng);
    pts.row(static_cast<Eigen::Index>(i)) << r * std::cos(th), r * std::sin(th);
  }
  for (std::size_t k = 0; k < n_ring; ++k) {
    const double th = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n_ring);
    pts.row(static_cast<Eigen::Index>(n_disc + k)) << 2.0 * std::cos(th), 2.0 * std::sin(th);
  }
  f.particles = ParticleMeasure::uniform(std::move(pts));

  // Cells of width 2/grid; the grid spans [-2.1, 2.1]² (rounded up to whole cells).
  const std::size_t half_cells = (21 * opts.grid + 19) / 20;
  const double half = 2.0 * static_cast<double>(half_cells) / static_cast<double>(opts.grid);
  const GridSpec grid = square_grid(-half, half, 2 * half_cells);
  std::vector<double> values(grid.size(), 0.0);
  std::size_t disc_cells = 0;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (grid.center(c).norm() <= 1.0) ++disc_cells;
  }
  const double disc_value = 0.5 / (static_cast<double>(disc_cells) * grid.cell_volume());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (grid.center(c).norm() <= 1.0) values[c] = disc_value;
  }
  const std::size_t ring_points = 64 * opts.grid;
  const double ring_value = 0.5 / static_cast<double>(ring_points) / grid.cell_volume();
  for (std::size_t k = 0; k < ring_points; ++k) {
    const double th = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(ring_points);
    values[grid.locate_clamped(vec2(2.0 * std::cos(th), 2.0 * std::sin(th)))] += ring_value;
  }
  f.grid_data = GridMeasure(grid, std::move(values));

  f.analytic_density = [](const Vector& y) { return y.norm() <= 1.0 ? 1.0 / kPi : 0.0; };
  f.analytic_map = [](const Vector& y) -> Vector {
    const double r = y.norm();
    return r <= 1.0 ? y : Vector(y / r);
  };
  f.tolerance = {{"conditional_rel_l1", 0.02}, {"kl_objective", 1e-3}, {"projection_radius", 1e-9}};
  return f;
}

Fixture offset_polar_underdetermined(const std::function<double(double)>& mu_r_density, const FixtureOptions& opts) {
  Fixture f = offset_polar_base("offset-polar-under", opts);
  f.description = "radial data through |x - (1,1)| on the unit ball around (1,1)";
  const double z = unit_interval_mass(mu_r_density);
  if (!(z > 0.0)) throw Error(ErrorCode::ZeroMass, "mu_r has no mass on [0,1]");
  const GridSpec bins(Box(Vector::Zero(1), Vector::Ones(1)), {opts.bins});
  f.grid_data = normalize(GridMeasure::from_density(bins, Domain::box(Vector::Zero(1), Vector::Ones(1)),
                                                    [&](const Vector& r) { return mu_r_density(r[0]); }));
  f.particles = quantile_samples(mu_r_density, opts.samples);
  f.analytic_density = [mu = mu_r_density, z](const Vector& x) {
    const double r = std::hypot(x[0] - 1.0, x[1] - 1.0);
    if (r > 1.0) return 0.0;
    return mu(r) / z / (2.0 * kPi * r);
  };
  return f;
}

Fixture offset_polar_underdetermined(const ParticleMeasure& mu_r, const FixtureOptions& opts) {
  if (mu_r.dim() != 1) throw Error(ErrorCode::UnsupportedData, "mu_r must be one-dimensional");
  for (std::size_t i = 0; i < mu_r.size(); ++i) {
    const double r = mu_r.points()(static_cast<Eigen::Index>(i), 0);
    if (mu_r.weight(i) > 0.0 && (r < 0.0 || r > 1.0)) {
      throw Error(ErrorCode::UnsupportedData, "mu_r has mass outside [0,1]");
    }
  }
  Fixture f = offset_polar_base("offset-polar-under", opts);
  f.description = "radial samples through |x - (1,1)| on the unit ball around (1,1)";
  const GridSpec bins(Box(Vector::Zero(1), Vector::Ones(1)), {opts.bins});
  const GridMeasure hist = GridMeasure::from_particles(bins, normalize(mu_r));
  f.grid_data = hist;
  f.particles = normalize(mu_r);
  f.analytic_density = [hist](const Vector& x) {
    const double r = std::hypot(x[0] - 1.0, x[1] - 1.0);
    if (r > 1.0) return 0.0;
    Vector rv(1);
    rv[0] = r;
    return hist.value(hist.grid().locate_clamped(rv)) / (2.0 * kPi * r);
  };
  return f;
}

Fixture offset_polar_reg_kl(const FixtureOptions& opts) {
  Fixture f = offset_polar_underdetermined([](double) { return 1.0; }, opts);
  f.name = "offset-polar-reg-kl";
  f.description = "offset polar map, uniform radial data, Gaussian prior, KL regularization";
  f.formulation = Formulation::RegEntropy;
  const Domain& theta = f.map.theta();
  f.reg.alpha = opts.alpha;
  f.reg.p = 2.0;
  f.reg.prior = normalize(GridMeasure::from_density(*f.theta_grid, theta,
                                                    [](const Vector& x) { return std::exp(-0.5 * x.squaredNorm()); }));
  const double expo = 1.0 / (1.0 + opts.alpha);
  f.analytic_density = normalized_on(*f.theta_grid, theta, [expo](const Vector& x) {
    const double r = std::hypot(x[0] - 1.0, x[1] - 1.0);
    const double level = 2.0 * kPi * r * std::exp(-(2.0 + r * r) / 2.0) * bessel_i0(std::numbers::sqrt2 * r);
    return std::exp(-0.5 * x.squaredNorm()) * std::pow(1.0 / level, expo);
  });
  f.tolerance = {{"reg_entropy_rel_l1", 0.05}, {"bessel_agreement", 1e-10}};
  return f;
}

Fixture offset_polar_reg_w2(const FixtureOptions& opts) {
  Fixture f{"offset-polar-reg-w2", "offset polar map on [0,2]^2, uniform radial data, regularized W2",
            offset_polar_map().with_domain(Domain::box(vec2(0.0, 0.0), vec2(2.0, 2.0)))};
  f.formulation = Formulation::RegWasserstein;
  f.reg.alpha = opts.alpha;
  f.reg.p = 2.0;
  f.particles = quantile_samples([](double) { return 1.0; }, opts.samples);
  const double alpha = opts.alpha;
  f.analytic_map = [alpha](const Vector& y) {
    return diagonal((1.0 - std::numbers::sqrt2 / 2.0 * y[0]) / (1.0 + alpha));
  };
  f.tolerance = {{"reg_map_max_error", 2e-3}};
  return f;
}

Fixture linear_fixture(const Matrix& a, LinearRegime regime, ParticleMeasure data, double alpha) {
  const auto rows = static_cast<std::size_t>(a.rows());
  const auto cols = static_cast<std::size_t>(a.cols());
  if (regime == LinearRegime::Over && rows < cols) {
    throw Error(ErrorCode::RankDeficient, "overdetermined fixture needs rows >= cols");
  }
  if (regime == LinearRegime::Under && rows > cols) {
    throw Error(ErrorCode::RankDeficient, "underdetermined fixture needs rows <= cols");
  }
  if (data.dim() != rows) throw Error(ErrorCode::DimensionMismatch, "data dimension differs from matrix rows");
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");

  Fixture f{regime == LinearRegime::Over ? "linear-over" : "linear-under", "", linear_map(a)};
  const Matrix answer = alpha > 0.0 ? tikhonov_inverse(a, alpha) : pseudoinverse(a);
  f.analytic_map = [answer](const Vector& y) -> Vector { return answer * y; };
  f.particles = std::move(data);
  if (alpha > 0.0) {
    f.name = "linear-reg";
    f.description = "Tikhonov-regularized linear reconstruction";
    f.formulation = Formulation::RegWasserstein;
    f.reg.alpha = alpha;
    f.reg.p = 2.0;
  } else if (regime == LinearRegime::Over) {
    f.description = "overdetermined linear map; Wasserstein reconstruction through the left inverse";
    f.formulation = Formulation::Marginal;
  } else {
    f.description = "underdetermined linear map; minimum-norm reconstruction through the right inverse";
    f.formulation = Formulation::Moment;
  }
  f.tolerance = {{"map_max_error", 1e-10}};
  return f;
}

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = {"polar-over",   "offset-polar-under",  "linear-over",
                                                 "linear-under", "linear-reg",          "offset-polar-reg-kl",
                                                 "offset-polar-reg-w2"};
  return names;
}

Fixture make_fixture(const std::string& name, const FixtureOptions& opts) {
  Matrix tall(3, 2);
  tall << 1.0, 0.0, 0.0, 1.0, 1.0, 1.0;
  Matrix wide(2, 3);
  wide << 1.0, 0.0, 1.0, 0.0, 1.0, 1.0;
  if (name == "polar-over") return polar_overdetermined(opts);
  if (name == "offset-polar-under") return offset_polar_underdetermined([](double) { return 1.0; }, opts);
  if (name == "offset-polar-reg-kl") return offset_polar_reg_kl(opts);
  if (name == "offset-polar-reg-w2") return offset_polar_reg_w2(opts);
  if (name == "linear-over") {
    return linear_fixture(tall, LinearRegime::Over, gaussian_particles(opts.samples, 3, opts.seed, "linear-over/data"));
  }
  if (name == "linear-under") {
    return linear_fixture(wide, LinearRegime::Under,
                          gaussian_particles(opts.samples, 2, opts.seed, "linear-under/data"));
  }
  if (name == "linear-reg") {
    return linear_fixture(tall, LinearRegime::Over, gaussian_particles(opts.samples, 3, opts.seed, "linear-reg/data"),
                          opts.alpha);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown fixture '" + name + "'");
}

}  // namespace minv
