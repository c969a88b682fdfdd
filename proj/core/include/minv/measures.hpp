#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "minv/domain.hpp"

namespace minv {

class ForwardMap;

/// Weighted point cloud. Rows of `points()` are the support points.
///
/// Construction validates shape, finiteness and nonnegativity; it does not
/// force unit mass so that `normalize` has something to act on. Operations that
/// need a probability measure check `is_normalized()` themselves.
class ParticleMeasure {
 public:
  ParticleMeasure() = default;
  ParticleMeasure(Matrix points, Vector weights);

  static ParticleMeasure uniform(Matrix points);
  static ParticleMeasure dirac(const Vector& point);

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
  [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(points_.cols()); }
  [[nodiscard]] const Matrix& points() const noexcept { return points_; }
  [[nodiscard]] const Vector& weights() const noexcept { return weights_; }
  [[nodiscard]] Vector point(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)).transpose(); }
  [[nodiscard]] double weight(std::size_t i) const { return weights_[static_cast<Eigen::Index>(i)]; }
  [[nodiscard]] double total_mass() const { return weights_.sum(); }
  [[nodiscard]] bool is_normalized(double tol = 1e-12) const;

 private:
  Matrix points_;
  Vector weights_;
};

/// Regular rectangular grid over a bounded box; cells are stored row-major
/// (first axis slowest).
struct GridSpec {
  Box box;
  std::vector<std::size_t> shape;

  GridSpec() = default;
  GridSpec(Box b, std::vector<std::size_t> s);

  [[nodiscard]] std::size_t dim() const noexcept { return shape.size(); }
  [[nodiscard]] std::size_t size() const noexcept;
  [[nodiscard]] Vector cell_width() const;
  [[nodiscard]] double cell_volume() const;
  [[nodiscard]] double cell_diagonal() const;
  [[nodiscard]] Vector center(std::size_t flat) const;
  [[nodiscard]] std::vector<std::size_t> unravel(std::size_t flat) const;
  [[nodiscard]] std::size_t ravel(const std::vector<std::size_t>& idx) const;
  /// Cell containing x; the upper face of the box belongs to the last cell.
  [[nodiscard]] std::optional<std::size_t> locate(const Vector& x) const;
  /// Like `locate`, but snaps out-of-box points to the nearest boundary cell.
  [[nodiscard]] std::size_t locate_clamped(const Vector& x) const;
  /// Per-cell membership: a cell belongs to the domain iff its center does.
  [[nodiscard]] std::vector<char> mask_for(const Domain& domain) const;

  friend bool operator==(const GridSpec& a, const GridSpec& b);
};

/// Piecewise-constant density on a GridSpec with a membership mask.
class GridMeasure {
 public:
  GridMeasure() = default;
  GridMeasure(GridSpec grid, std::vector<double> values, std::vector<char> mask);
  /// All cells masked in.
  GridMeasure(GridSpec grid, std::vector<double> values);

  /// Samples `density` at the centers of the cells inside `domain`.
  static GridMeasure from_density(const GridSpec& grid, const Domain& domain,
                                  const std::function<double(const Vector&)>& density);
  /// Histogram of a particle measure (cell mass = particle mass falling in it).
  static GridMeasure from_particles(const GridSpec& grid, const ParticleMeasure& m);

  [[nodiscard]] const GridSpec& grid() const noexcept { return grid_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
  [[nodiscard]] const std::vector<char>& mask() const noexcept { return mask_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double value(std::size_t i) const { return values_[i]; }
  [[nodiscard]] bool masked(std::size_t i) const { return mask_[i] != 0; }
  [[nodiscard]] double cell_mass(std::size_t i) const { return values_[i] * grid_.cell_volume(); }
  [[nodiscard]] std::vector<double> cell_masses() const;
  [[nodiscard]] double total_mass() const;
  [[nodiscard]] bool is_normalized(double tol = 1e-10) const;

  /// Point masses at masked cell centers.
  [[nodiscard]] ParticleMeasure to_particles() const;

 private:
  GridSpec grid_;
  std::vector<double> values_;
  std::vector<char> mask_;
};

using RegionPredicate = std::function<bool(const Vector&)>;

ParticleMeasure normalize(const ParticleMeasure& m);
GridMeasure normalize(const GridMeasure& m);

ParticleMeasure pushforward(const ForwardMap& g, const ParticleMeasure& m);
/// Pushforward of a point-valued map that is not a ForwardMap (inversion, projection, ...).
ParticleMeasure pushforward(const std::function<Vector(const Vector&)>& f, const ParticleMeasure& m);

/// Histogram pushforward: each source cell's mass lands in the output cell that
/// contains the image of its center.
GridMeasure pushforward_grid(const ForwardMap& g, const GridMeasure& m, const GridSpec& out_bins);

ParticleMeasure condition(const ParticleMeasure& m, const RegionPredicate& region);
GridMeasure condition(const GridMeasure& m, const RegionPredicate& region);

/// Mass of the region (cell-center rule for grids).
double region_mass(const ParticleMeasure& m, const RegionPredicate& region);
double region_mass(const GridMeasure& m, const RegionPredicate& region);

/// ∫ ρ log ρ with 0·log 0 = 0.
double entropy(const GridMeasure& m);

/// ∫ |x|^p dm.
double moment(const ParticleMeasure& m, double p);
double moment(const GridMeasure& m, double p);

}  // namespace minv
