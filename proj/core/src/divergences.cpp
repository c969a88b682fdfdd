#include "minv/divergences.hpp"

#include <cmath>
#include <limits>

#include "minv/error.hpp"

namespace minv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

PhiKind PhiKind::kl() {
  return PhiKind(
      Tag::KL, [](double t) { return t > 0.0 ? t * std::log(t) : 0.0; }, 0.0, kInf, "kl");
}

PhiKind PhiKind::chi_squared() {
  return PhiKind(
      Tag::ChiSquared, [](double t) { return (t - 1.0) * (t - 1.0); }, 1.0, kInf, "chi2");
}

PhiKind PhiKind::total_variation() {
  return PhiKind(
      Tag::TotalVariation, [](double t) { return 0.5 * std::abs(t - 1.0); }, 0.5, 0.5, "tv");
}

PhiKind PhiKind::custom(std::function<double(double)> phi, double phi_at_zero, double recession_slope,
                        std::string name) {
  if (!phi) throw Error(ErrorCode::InvalidArgument, "custom phi is empty");
  if (!(std::abs(phi(1.0)) <= 1e-12)) throw Error(ErrorCode::InvalidArgument, "custom phi must vanish at 1");
  return PhiKind(Tag::Custom, std::move(phi), phi_at_zero, recession_slope, std::move(name));
}

double PhiKind::operator()(double t) const { return t == 0.0 ? phi0_ : phi_(t); }

double phi_divergence(std::span<const double> p, std::span<const double> q, const PhiKind& kind) {
  if (p.size() != q.size()) throw Error(ErrorCode::SupportMismatch, "divergence arguments have different supports");
  double sum = 0.0;
  double orphan = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (q[i] > 0.0) {
      sum += kind(p[i] / q[i]) * q[i];
    } else if (p[i] > 0.0) {
      // P not absolutely continuous w.r.t. Q
      if (std::isinf(kind.recession_slope())) return kInf;
      orphan += p[i];
    }
  }
  return orphan > 0.0 ? sum + kind.recession_slope() * orphan : sum;
}

double phi_divergence(const ParticleMeasure& p, const ParticleMeasure& q, const PhiKind& kind) {
  if (p.size() != q.size() || p.dim() != q.dim() || ((p.points() - q.points()).cwiseAbs().maxCoeff() > 1e-12)) {
    throw Error(ErrorCode::SupportMismatch, "particle measures do not share a point set");
  }
  const Vector& a = p.weights();
  const Vector& b = q.weights();
  return phi_divergence(std::span<const double>(a.data(), p.size()), std::span<const double>(b.data(), q.size()),
                        kind);
}

double phi_divergence(const GridMeasure& p, const GridMeasure& q, const PhiKind& kind) {
  if (!(p.grid() == q.grid())) throw Error(ErrorCode::SupportMismatch, "grid measures live on different grids");
  const auto a = p.cell_masses();
  const auto b = q.cell_masses();
  return phi_divergence(a, b, kind);
}

double jensen_lower_bound(const PhiKind& kind, double nu1) {
  // Summed masses may overshoot 1 by rounding.
  if (!(nu1 > 0.0 && nu1 <= 1.0 + 1e-9)) throw Error(ErrorCode::InvalidArgument, "range mass must lie in (0, 1]");
  if (nu1 >= 1.0) return kind(1.0);
  if (std::isinf(kind.at_zero())) {
    throw Error(ErrorCode::InfiniteBound, "phi(0) is infinite and the range misses data mass");
  }
  return nu1 * kind(1.0 / nu1) + (1.0 - nu1) * kind.at_zero();
}

}  // namespace minv
