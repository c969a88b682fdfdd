#pragma once

#include <functional>
#include <span>
#include <string>

#include "minv/measures.hpp"

namespace minv {

/// Convex generator φ with φ(1) = 0 defining 𝒟φ(P‖Q) = ∫ φ(dP/dQ) dQ.
///
/// Besides φ itself a kind records φ(0) (the continuous extension at zero,
/// possibly +∞) and the recession slope lim φ(t)/t, which prices P-mass that
/// sits where Q has none.
class PhiKind {
 public:
  enum class Tag { KL, ChiSquared, TotalVariation, Custom };

  /// φ(t) = t log t, φ(0) = 0.
  static PhiKind kl();
  /// φ(t) = (t − 1)², φ(0) = 1.
  static PhiKind chi_squared();
  /// φ(t) = |t − 1| / 2, so disjoint supports have divergence exactly 1.
  static PhiKind total_variation();
  /// Throws InvalidArgument unless |φ(1)| ≤ 1e-12.
  static PhiKind custom(std::function<double(double)> phi, double phi_at_zero, double recession_slope,
                        std::string name = "custom");

  [[nodiscard]] Tag tag() const noexcept { return tag_; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] double operator()(double t) const;
  [[nodiscard]] double at_zero() const noexcept { return phi0_; }
  [[nodiscard]] double recession_slope() const noexcept { return slope_; }

 private:
  PhiKind(Tag tag, std::function<double(double)> phi, double phi0, double slope, std::string name)
      : tag_(tag), phi_(std::move(phi)), phi0_(phi0), slope_(slope), name_(std::move(name)) {}

  Tag tag_;
  std::function<double(double)> phi_;
  double phi0_;
  double slope_;
  std::string name_;
};

/// Σ_{q>0} φ(p/q) q + slope·P({q = 0}); may be +∞.
double phi_divergence(std::span<const double> p, std::span<const double> q, const PhiKind& kind);

/// P and Q must share a point set (same points, same order).
double phi_divergence(const ParticleMeasure& p, const ParticleMeasure& q, const PhiKind& kind);
/// P and Q must share a grid; compared through cell masses.
double phi_divergence(const GridMeasure& p, const GridMeasure& q, const PhiKind& kind);

/// ν₁·φ(1/ν₁) + (1 − ν₁)·φ(0): the smallest divergence from a data measure
/// that any measure supported on a set of data mass ν₁ can attain.
double jensen_lower_bound(const PhiKind& kind, double nu1);

}  // namespace minv
