#include "minv/measures.hpp"

#include <algorithm>
#include <cmath>

#include "minv/error.hpp"
#include "minv/maps.hpp"

namespace minv {

namespace {

constexpr double kZeroMass = 1e-300;
constexpr double kEscapeTolerance = 1e-9;

}  // namespace

// ---------------------------------------------------------------- particles

ParticleMeasure::ParticleMeasure(Matrix points, Vector weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.rows() != weights_.size()) {
    throw Error(ErrorCode::InvalidMeasure, "particle count differs from weight count");
  }
  if (points_.rows() == 0 || points_.cols() == 0) {
    throw Error(ErrorCode::InvalidMeasure, "particle measure needs at least one point of positive dimension");
  }
  if (!points_.allFinite() || !weights_.allFinite()) {
    throw Error(ErrorCode::InvalidMeasure, "particle points and weights must be finite");
  }
  if ((weights_.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidMeasure, "particle weights must be nonnegative");
  }
}

ParticleMeasure ParticleMeasure::uniform(Matrix points) {
  const auto n = points.rows();
  if (n == 0) throw Error(ErrorCode::InvalidMeasure, "uniform measure needs at least one point");
  return ParticleMeasure(std::move(points), Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

ParticleMeasure ParticleMeasure::dirac(const Vector& point) {
  Matrix pts(1, point.size());
  pts.row(0) = point.transpose();
  return ParticleMeasure(std::move(pts), Vector::Ones(1));
}

bool ParticleMeasure::is_normalized(double tol) const { return std::abs(total_mass() - 1.0) <= tol; }

// ---------------------------------------------------------------- grids

GridSpec::GridSpec(Box b, std::vector<std::size_t> s) : box(std::move(b)), shape(std::move(s)) {
  if (shape.size() != box.dim()) {
    throw Error(ErrorCode::InvalidMeasure, "grid shape rank differs from box dimension");
  }
  if (!box.bounded()) throw Error(ErrorCode::InvalidMeasure, "grid box must be bounded");
  for (auto k : shape) {
    if (k == 0) throw Error(ErrorCode::InvalidMeasure, "grid cell counts must be positive");
  }
}

std::size_t GridSpec::size() const noexcept {
  std::size_t n = 1;
  for (auto k : shape) n *= k;
  return n;
}

Vector GridSpec::cell_width() const {
  Vector w(static_cast<Eigen::Index>(dim()));
  for (std::size_t a = 0; a < dim(); ++a) {
    const auto i = static_cast<Eigen::Index>(a);
    w[i] = (box.upper[i] - box.lower[i]) / static_cast<double>(shape[a]);
  }
  return w;
}

double GridSpec::cell_volume() const { return cell_width().prod(); }

double GridSpec::cell_diagonal() const { return cell_width().norm(); }

std::vector<std::size_t> GridSpec::unravel(std::size_t flat) const {
  std::vector<std::size_t> idx(dim());
  for (std::size_t a = dim(); a-- > 0;) {
    idx[a] = flat % shape[a];
    flat /= shape[a];
  }
  return idx;
}

std::size_t GridSpec::ravel(const std::vector<std::size_t>& idx) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < dim(); ++a) flat = flat * shape[a] + idx[a];
  return flat;
}

Vector GridSpec::center(std::size_t flat) const {
  const auto idx = unravel(flat);
  const Vector w = cell_width();
  Vector c(static_cast<Eigen::Index>(dim()));
  for (std::size_t a = 0; a < dim(); ++a) {
    const auto i = static_cast<Eigen::Index>(a);
    c[i] = box.lower[i] + (static_cast<double>(idx[a]) + 0.5) * w[i];
  }
  return c;
}

std::optional<std::size_t> GridSpec::locate(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) {
    throw Error(ErrorCode::DimensionMismatch, "point dimension differs from grid dimension");
  }
  if (!box.contains(x)) return std::nullopt;
  return locate_clamped(x);
}

std::size_t GridSpec::locate_clamped(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) {
    throw Error(ErrorCode::DimensionMismatch, "point dimension differs from grid dimension");
  }
  std::size_t flat = 0;
  for (std::size_t a = 0; a < dim(); ++a) {
    const auto i = static_cast<Eigen::Index>(a);
    const double t = (x[i] - box.lower[i]) / (box.upper[i] - box.lower[i]) * static_cast<double>(shape[a]);
    long long k = std::isfinite(t) ? static_cast<long long>(std::floor(t)) : (t > 0 ? static_cast<long long>(shape[a]) : 0);
    k = std::clamp<long long>(k, 0, static_cast<long long>(shape[a]) - 1);
    flat = flat * shape[a] + static_cast<std::size_t>(k);
  }
  return flat;
}

std::vector<char> GridSpec::mask_for(const Domain& domain) const {
  if (domain.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "domain dimension differs from grid");
  std::vector<char> mask(size());
  for (std::size_t c = 0; c < size(); ++c) mask[c] = domain.contains(center(c)) ? 1 : 0;
  return mask;
}

bool operator==(const GridSpec& a, const GridSpec& b) {
  return a.shape == b.shape && a.box.lower == b.box.lower && a.box.upper == b.box.upper;
}

GridMeasure::GridMeasure(GridSpec grid, std::vector<double> values, std::vector<char> mask)
    : grid_(std::move(grid)), values_(std::move(values)), mask_(std::move(mask)) {
  if (values_.size() != grid_.size() || mask_.size() != grid_.size()) {
    throw Error(ErrorCode::InvalidMeasure, "grid values/mask size differs from cell count");
  }
  for (std::size_t c = 0; c < values_.size(); ++c) {
    if (!std::isfinite(values_[c]) || values_[c] < 0.0) {
      throw Error(ErrorCode::InvalidMeasure, "grid densities must be finite and nonnegative");
    }
    if (!mask_[c] && values_[c] != 0.0) {
      throw Error(ErrorCode::InvalidMeasure, "grid density must vanish outside the mask");
    }
  }
}

GridMeasure::GridMeasure(GridSpec grid, std::vector<double> values)
    : GridMeasure(grid, std::move(values), std::vector<char>(grid.size(), 1)) {}

GridMeasure GridMeasure::from_density(const GridSpec& grid, const Domain& domain,
                                      const std::function<double(const Vector&)>& density) {
  auto mask = grid.mask_for(domain);
  std::vector<double> values(grid.size(), 0.0);
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (mask[c]) values[c] = density(grid.center(c));
  }
  return GridMeasure(grid, std::move(values), std::move(mask));
}

GridMeasure GridMeasure::from_particles(const GridSpec& grid, const ParticleMeasure& m) {
  if (m.dim() != grid.dim()) throw Error(ErrorCode::DimensionMismatch, "particle dimension differs from grid");
  std::vector<double> mass(grid.size(), 0.0);
  double escaped = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Vector x = m.point(i);
    if (!grid.box.contains(x)) escaped += m.weight(i);
    mass[grid.locate_clamped(x)] += m.weight(i);
  }
  if (escaped > kEscapeTolerance * std::max(1.0, m.total_mass())) {
    throw Error(ErrorCode::RangeEscape, "particle mass " + std::to_string(escaped) + " lies outside the grid box");
  }
  const double vol = grid.cell_volume();
  for (auto& v : mass) v /= vol;
  return GridMeasure(grid, std::move(mass));
}

std::vector<double> GridMeasure::cell_masses() const {
  std::vector<double> out(values_.size());
  const double vol = grid_.cell_volume();
  for (std::size_t c = 0; c < values_.size(); ++c) out[c] = values_[c] * vol;
  return out;
}

double GridMeasure::total_mass() const {
  double s = 0.0;
  for (std::size_t c = 0; c < values_.size(); ++c) {
    if (mask_[c]) s += values_[c];
  }
  return s * grid_.cell_volume();
}

bool GridMeasure::is_normalized(double tol) const { return std::abs(total_mass() - 1.0) <= tol; }

ParticleMeasure GridMeasure::to_particles() const {
  std::vector<std::size_t> cells;
  for (std::size_t c = 0; c < size(); ++c) {
    if (mask_[c]) cells.push_back(c);
  }
  if (cells.empty()) throw Error(ErrorCode::ZeroMass, "grid measure has no masked cells");
  Matrix pts(static_cast<Eigen::Index>(cells.size()), static_cast<Eigen::Index>(grid_.dim()));
  Vector w(static_cast<Eigen::Index>(cells.size()));
  const double vol = grid_.cell_volume();
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    pts.row(r) = grid_.center(cells[k]).transpose();
    w[r] = values_[cells[k]] * vol;
  }
  return ParticleMeasure(std::move(pts), std::move(w));
}

// ---------------------------------------------------------------- operations

ParticleMeasure normalize(const ParticleMeasure& m) {
  const double total = m.total_mass();
  if (!(total > kZeroMass)) throw Error(ErrorCode::ZeroMass, "cannot normalize a particle measure of zero mass");
  return ParticleMeasure(m.points(), m.weights() / total);
}

GridMeasure normalize(const GridMeasure& m) {
  const double total = m.total_mass();
  if (!(total > kZeroMass)) throw Error(ErrorCode::ZeroMass, "cannot normalize a grid measure of zero mass");
  std::vector<double> values = m.values();
  for (auto& v : values) v /= total;
  return GridMeasure(m.grid(), std::move(values), m.mask());
}

ParticleMeasure pushforward(const ForwardMap& g, const ParticleMeasure& m) {
  if (m.dim() != g.in_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "measure dimension " + std::to_string(m.dim()) +
                                                  " differs from map input dimension " +
                                                  std::to_string(g.in_dim()));
  }
  return pushforward([&g](const Vector& x) { return g(x); }, m);
}

ParticleMeasure pushforward(const std::function<Vector(const Vector&)>& f, const ParticleMeasure& m) {
  Matrix out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Vector y = f(m.point(i));
    if (i == 0) out.resize(static_cast<Eigen::Index>(m.size()), y.size());
    if (y.size() != out.cols()) throw Error(ErrorCode::DimensionMismatch, "map output dimension is not constant");
    out.row(static_cast<Eigen::Index>(i)) = y.transpose();
  }
  return ParticleMeasure(std::move(out), m.weights());
}

GridMeasure pushforward_grid(const ForwardMap& g, const GridMeasure& m, const GridSpec& out_bins) {
  if (m.grid().dim() != g.in_dim()) throw Error(ErrorCode::DimensionMismatch, "grid dimension differs from map input");
  if (out_bins.dim() != g.out_dim()) throw Error(ErrorCode::DimensionMismatch, "output bins differ from map output dimension");
  std::vector<double> mass(out_bins.size(), 0.0);
  double escaped = 0.0;
  double total = 0.0;
  for (std::size_t c = 0; c < m.size(); ++c) {
    if (!m.masked(c) || m.value(c) == 0.0) continue;
    const double w = m.cell_mass(c);
    total += w;
    const Vector y = g(m.grid().center(c));
    if (!out_bins.box.contains(y)) escaped += w;
    mass[out_bins.locate_clamped(y)] += w;
  }
  if (escaped > kEscapeTolerance * std::max(total, kZeroMass)) {
    throw Error(ErrorCode::RangeEscape, "pushforward mass " + std::to_string(escaped) + " escapes the output bins");
  }
  const double vol = out_bins.cell_volume();
  for (auto& v : mass) v /= vol;
  return GridMeasure(out_bins, std::move(mass));
}

double region_mass(const ParticleMeasure& m, const RegionPredicate& region) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (region(m.point(i))) s += m.weight(i);
  }
  return s;
}

double region_mass(const GridMeasure& m, const RegionPredicate& region) {
  double s = 0.0;
  for (std::size_t c = 0; c < m.size(); ++c) {
    if (m.masked(c) && m.value(c) > 0.0 && region(m.grid().center(c))) s += m.cell_mass(c);
  }
  return s;
}

ParticleMeasure condition(const ParticleMeasure& m, const RegionPredicate& region) {
  Vector w = m.weights();
  double inside = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (region(m.point(i))) {
      inside += w[r];
    } else {
      w[r] = 0.0;
    }
  }
  if (!(inside > 0.0)) throw Error(ErrorCode::ZeroMass, "region carries no mass; conditional is undefined");
  return ParticleMeasure(m.points(), w / inside);
}

GridMeasure condition(const GridMeasure& m, const RegionPredicate& region) {
  std::vector<double> values(m.size(), 0.0);
  std::vector<char> mask(m.size(), 0);
  double inside = 0.0;
  for (std::size_t c = 0; c < m.size(); ++c) {
    if (!m.masked(c) || !region(m.grid().center(c))) continue;
    mask[c] = 1;
    values[c] = m.value(c);
    inside += m.cell_mass(c);
  }
  if (!(inside > 0.0)) throw Error(ErrorCode::ZeroMass, "region carries no mass; conditional is undefined");
  for (auto& v : values) v /= inside;
  return GridMeasure(m.grid(), std::move(values), std::move(mask));
}

double entropy(const GridMeasure& m) {
  double s = 0.0;
  for (std::size_t c = 0; c < m.size(); ++c) {
    const double v = m.value(c);
    if (m.masked(c) && v > 0.0) s += v * std::log(v);
  }
  return s * m.grid().cell_volume();
}

double moment(const ParticleMeasure& m, double p) {
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "moment order must be >= 1");
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double w = m.weight(i);
    if (w != 0.0) s += w * std::pow(m.points().row(static_cast<Eigen::Index>(i)).norm(), p);
  }
  return s;
}

double moment(const GridMeasure& m, double p) {
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "moment order must be >= 1");
  double s = 0.0;
  for (std::size_t c = 0; c < m.size(); ++c) {
    if (m.masked(c) && m.value(c) > 0.0) s += m.value(c) * std::pow(m.grid().center(c).norm(), p);
  }
  return s * m.grid().cell_volume();
}

}  // namespace minv
