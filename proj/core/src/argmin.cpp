#include "minv/argmin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "minv/error.hpp"

namespace minv {

namespace {

bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

std::size_t default_resolution(std::size_t dim) {
  switch (dim) {
    case 1: return 2001;
    case 2: return 201;
    case 3: return 41;
    default: return std::max<std::size_t>(3, static_cast<std::size_t>(std::pow(1e5, 1.0 / static_cast<double>(dim))));
  }
}

Matrix fd_jacobian(const ForwardMap& g, const Vector& x) {
  const auto m = x.size();
  Matrix j(static_cast<Eigen::Index>(g.out_dim()), m);
  Vector xp = x;
  for (Eigen::Index a = 0; a < m; ++a) {
    const double h = 1e-7 * std::max(1.0, std::abs(x[a]));
    xp[a] = x[a] + h;
    const Vector fp = g(xp);
    xp[a] = x[a] - h;
    const Vector fm = g(xp);
    xp[a] = x[a];
    j.col(a) = (fp - fm) / (2.0 * h);
  }
  return j;
}

}  // namespace

Vector pattern_search(const Objective& f, Vector x0, const Domain& theta, Vector steps,
                      const PatternSearchOptions& opts) {
  const Box box = theta.bounding_box();
  double fx = f(x0);
  std::size_t evals = 1;
  std::size_t halvings = 0;
  Vector trial;
  while (halvings < opts.halvings && evals < opts.max_evaluations) {
    bool improved = false;
    for (Eigen::Index a = 0; a < x0.size() && evals < opts.max_evaluations; ++a) {
      for (double sign : {1.0, -1.0}) {
        trial = x0;
        trial[a] += sign * steps[a];
        trial = box.clamp(trial);
        if (trial[a] == x0[a] || !theta.contains(trial)) continue;
        const double ft = f(trial);
        ++evals;
        if (ft < fx) {
          x0 = trial;
          fx = ft;
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      steps *= 0.5;
      ++halvings;
    }
  }
  return x0;
}

std::optional<Vector> project_to_fiber(const ForwardMap& g, Vector x, const Vector& y, double tol,
                                       std::size_t max_iter) {
  Vector r = g(x) - y;
  double rn = r.norm();
  for (std::size_t it = 0; it < max_iter && rn > tol; ++it) {
    const Matrix j = fd_jacobian(g, x);
    const Vector dx = -j.completeOrthogonalDecomposition().solve(r);
    if (!dx.allFinite() || dx.norm() == 0.0) return std::nullopt;
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k, t *= 0.5) {
      const Vector xn = x + t * dx;
      const Vector rn_vec = g(xn) - y;
      const double nn = rn_vec.norm();
      if (nn < rn) {
        x = xn;
        r = rn_vec;
        rn = nn;
        accepted = true;
        break;
      }
    }
    if (!accepted) return std::nullopt;
  }
  if (rn > tol || !g.theta().contains(x, 1e-12)) return std::nullopt;
  return x;
}

PointwiseSolver::PointwiseSolver(ForwardMap g, ArgminOptions opts) : g_(std::move(g)), opts_(opts) {
  const Domain& theta = g_.theta();
  if (g_.kind() == MapKind::Linear && !theta.bounded()) {
    closed_form_ = true;
    pinv_ = pseudoinverse(g_.matrix());
    return;
  }
  const Box box = theta.bounding_box();
  if (!box.bounded()) throw Error(ErrorCode::InvalidDomain, "argmin search needs a bounded domain, got " + theta.describe());

  const std::size_t d = g_.in_dim();
  const std::size_t res = opts_.resolution ? opts_.resolution : default_resolution(d);
  if (res < 2) throw Error(ErrorCode::InvalidArgument, "argmin lattice needs >= 2 points per axis");
  spacing_ = (box.upper - box.lower) / static_cast<double>(res - 1);

  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) total *= res;
  std::vector<Vector> pts;
  std::vector<long> index_of(total, -1);  // flat lattice index → row, for neighbour lookups
  pts.reserve(total);
  Vector x(static_cast<Eigen::Index>(d));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (std::size_t a = d; a-- > 0;) {
      const auto i = static_cast<Eigen::Index>(a);
      const std::size_t k = rem % res;
      // The last index lands on the upper face exactly; lower + spacing·(res−1) can overshoot by an ulp.
      x[i] = k + 1 == res ? box.upper[i] : box.lower[i] + spacing_[i] * static_cast<double>(k);
      rem /= res;
    }
    if (theta.contains(x)) {
      index_of[flat] = static_cast<long>(pts.size());
      pts.push_back(x);
    }
  }
  if (pts.empty()) throw Error(ErrorCode::InvalidDomain, "no lattice point falls inside " + theta.describe());

  lattice_.resize(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(d));
  images_.resize(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(g_.out_dim()));
  for (std::size_t k = 0; k < pts.size(); ++k) {
    lattice_.row(static_cast<Eigen::Index>(k)) = pts[k].transpose();
    images_.row(static_cast<Eigen::Index>(k)) = g_(pts[k]).transpose();
  }

  // Largest change of G between lattice neighbours.
  double variation = 0.0;
  std::size_t stride = 1;
  for (std::size_t a = d; a-- > 0;) {
    for (std::size_t flat = 0; flat < total; ++flat) {
      if ((flat / stride) % res == res - 1) continue;
      const long i = index_of[flat];
      const long j = index_of[flat + stride];
      if (i < 0 || j < 0) continue;
      variation = std::max(variation, (images_.row(i) - images_.row(j)).norm());
    }
    stride *= res;
  }
  fiber_tol_ = 2.0 * variation;
}

Vector PointwiseSolver::coarse_then_refine(const Vector& values, const Objective& f) const {
  // Refine from the best lattice point of up to three separate basins; a
  // minimum just across a clamped face (θ near 2π seen from θ = 0) is otherwise lost.
  constexpr int kStarts = 3;
  std::vector<Eigen::Index> starts;
  const auto near_start = [&](Eigen::Index k) {
    for (auto s : starts) {
      if (((lattice_.row(k) - lattice_.row(s)).transpose().cwiseAbs().array() <= 1.5 * spacing_.array()).all()) {
        return true;
      }
    }
    return false;
  };
  for (int round = 0; round < kStarts; ++round) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < values.size(); ++k) {
      if (values[k] < best && !near_start(k)) best = values[k];
    }
    if (!std::isfinite(best)) break;
    const double cutoff = best + opts_.tie_tol * std::max(1.0, std::abs(best));
    Eigen::Index pick = 0;
    while (values[pick] > cutoff || near_start(pick)) ++pick;  // lattice rows are in lexicographic order
    starts.push_back(pick);
  }

  Vector result;
  double result_value = std::numeric_limits<double>::infinity();
  for (auto s : starts) {
    Vector x = pattern_search(f, lattice_.row(s).transpose(), g_.theta(), spacing_, opts_.refine);
    const double v = f(x);
    if (v < result_value - opts_.tie_tol * std::max(1.0, std::abs(v))) {
      result = std::move(x);
      result_value = v;
    }
  }
  return result;
}

Vector PointwiseSolver::invert(const Vector& y) const {
  if (static_cast<std::size_t>(y.size()) != g_.out_dim()) throw Error(ErrorCode::DimensionMismatch, "data point has the wrong dimension");
  if (closed_form_) return pinv_ * y;
  const Vector values = (images_.rowwise() - y.transpose()).rowwise().squaredNorm();
  return coarse_then_refine(values, [&](const Vector& x) { return (g_(x) - y).squaredNorm(); });
}

Vector PointwiseSolver::project(const Vector& y) const { return g_(invert(y)); }

Vector PointwiseSolver::regularized(const Vector& y, double alpha, double p) const {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "p must be >= 1");
  if (static_cast<std::size_t>(y.size()) != g_.out_dim()) throw Error(ErrorCode::DimensionMismatch, "data point has the wrong dimension");
  if (alpha == 0.0) return invert(y);
  if (closed_form_) {
    if (p != 2.0) throw Error(ErrorCode::InvalidDomain, "regularized linear map on an unbounded domain needs p = 2");
    return tikhonov_inverse(g_.matrix(), alpha) * y;
  }
  const Vector dist = (images_.rowwise() - y.transpose()).rowwise().norm();
  const Vector norms = lattice_.rowwise().norm();
  const Vector values = dist.array().pow(p) + alpha * norms.array().pow(p);
  return coarse_then_refine(values, [&](const Vector& x) {
    return std::pow((g_(x) - y).norm(), p) + alpha * std::pow(x.norm(), p);
  });
}

Vector PointwiseSolver::least_norm(const Vector& y) const {
  if (static_cast<std::size_t>(y.size()) != g_.out_dim()) throw Error(ErrorCode::DimensionMismatch, "data point has the wrong dimension");
  const double feas_tol = 1e-10 * (1.0 + y.norm());
  if (closed_form_) {
    Vector x = pinv_ * y;
    if ((g_.matrix() * x - y).norm() > 1e-9 * (1.0 + y.norm())) {
      throw Error(ErrorCode::EmptyFiber, "data point is not in the range of the linear map");
    }
    return x;
  }
  const Vector dist = (images_.rowwise() - y.transpose()).rowwise().norm();
  std::vector<Eigen::Index> cand;
  for (Eigen::Index k = 0; k < dist.size(); ++k) {
    if (dist[k] <= fiber_tol_) cand.push_back(k);
  }
  if (cand.empty()) throw Error(ErrorCode::EmptyFiber, "no lattice point within the fiber tolerance");
  std::stable_sort(cand.begin(), cand.end(), [&](Eigen::Index a, Eigen::Index b) {
    return lattice_.row(a).squaredNorm() < lattice_.row(b).squaredNorm();
  });

  const auto on_fiber = [&](const Vector& x) { return project_to_fiber(g_, x, y, feas_tol); };
  std::optional<Vector> best;
  std::size_t tried = 0;
  for (auto k : cand) {
    if (tried == 3) break;
    auto start = on_fiber(lattice_.row(k).transpose());
    if (!start) continue;
    ++tried;
    // Coordinate search over the fiber: each trial is pulled back onto G⁻¹(y).
    Vector x = *start;
    double fx = x.squaredNorm();
    Vector steps = spacing_;
    std::size_t halvings = 0;
    std::size_t evals = 0;
    while (halvings < opts_.refine.halvings && evals < opts_.refine.max_evaluations) {
      bool improved = false;
      for (Eigen::Index a = 0; a < x.size() && !improved; ++a) {
        for (double sign : {1.0, -1.0}) {
          Vector t = x;
          t[a] += sign * steps[a];
          ++evals;
          auto proj = on_fiber(t);
          if (!proj) continue;
          const double ft = proj->squaredNorm();
          if (ft < fx) {
            x = *proj;
            fx = ft;
            improved = true;
            break;
          }
        }
      }
      if (!improved) {
        steps *= 0.5;
        ++halvings;
      }
    }
    if (!best || fx < best->squaredNorm() - 1e-14 ||
        (std::abs(fx - best->squaredNorm()) <= 1e-14 && lex_less(x, *best))) {
      best = x;
    }
  }
  if (!best) throw Error(ErrorCode::EmptyFiber, "fiber candidates could not be projected onto G^-1(y)");
  return *best;
}

}  // namespace minv
