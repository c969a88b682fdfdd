#include "minv/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "minv/error.hpp"

namespace minv {

namespace {

double xlogx_ratio(double p, double q) { return p > 0.0 ? p * std::log(p / q) : 0.0; }

std::vector<double> fiber_sums(const SimplexProblem& prob, const std::vector<double>& p) {
  std::vector<double> sums(prob.target.size(), 0.0);
  for (std::size_t c = 0; c < p.size(); ++c) sums[prob.fiber_of_cell[c]] += p[c];
  return sums;
}

// Deterministic, non-uniform starting weights so convergence is actually exercised.
double start_weight(std::size_t c) { return 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(c) + 0.3); }

}  // namespace

MirrorDescentResult mirror_descent_simplex(const SimplexProblem& prob, std::size_t iters, double step, double tol) {
  const std::size_t cells = prob.fiber_of_cell.size();
  const std::size_t bins = prob.target.size();
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "mirror descent step must be positive");
  for (std::size_t c = 0; c < cells; ++c) {
    if (prob.fiber_of_cell[c] >= bins) throw Error(ErrorCode::InvalidArgument, "cell assigned to a nonexistent fiber");
  }
  const double target_total = std::accumulate(prob.target.begin(), prob.target.end(), 0.0);
  if (std::abs(target_total - 1.0) > 1e-10) throw Error(ErrorCode::InvalidMeasure, "target masses must sum to 1");

  std::vector<std::size_t> fiber_size(bins, 0);
  for (auto b : prob.fiber_of_cell) ++fiber_size[b];

  const auto* kl = std::get_if<SimplexProblem::KLToPrior>(&prob.objective);
  if (kl && kl->prior.size() != cells) throw Error(ErrorCode::InvalidArgument, "prior size differs from cell count");

  // Cells that must carry zero mass: empty-target fibers, and zero-prior cells in the KL case.
  std::vector<char> active(cells, 1);
  for (std::size_t c = 0; c < cells; ++c) {
    if (prob.target[prob.fiber_of_cell[c]] <= 0.0) active[c] = 0;
    if (kl && !(kl->prior[c] > 0.0)) active[c] = 0;
  }
  std::vector<std::size_t> active_in_fiber(bins, 0);
  for (std::size_t c = 0; c < cells; ++c) active_in_fiber[prob.fiber_of_cell[c]] += active[c] ? 1 : 0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (prob.target[b] > 0.0 && active_in_fiber[b] == 0) {
      throw Error(ErrorCode::InvalidArgument, "fiber " + std::to_string(b) + " has positive target but no cells");
    }
  }

  std::vector<double> logp(cells, -std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < cells; ++c) {
    if (active[c]) logp[c] = std::log(start_weight(c));
  }

  // Normalization in log space: per fiber to its target (entropy) or globally to 1 (KL).
  auto renormalize = [&](std::vector<double>& lp) {
    if (!kl) {
      std::vector<double> mx(bins, -std::numeric_limits<double>::infinity());
      for (std::size_t c = 0; c < cells; ++c) {
        if (active[c]) mx[prob.fiber_of_cell[c]] = std::max(mx[prob.fiber_of_cell[c]], lp[c]);
      }
      std::vector<double> sum(bins, 0.0);
      for (std::size_t c = 0; c < cells; ++c) {
        if (active[c]) sum[prob.fiber_of_cell[c]] += std::exp(lp[c] - mx[prob.fiber_of_cell[c]]);
      }
      for (std::size_t c = 0; c < cells; ++c) {
        if (!active[c]) continue;
        const auto b = prob.fiber_of_cell[c];
        lp[c] += std::log(prob.target[b]) - mx[b] - std::log(sum[b]);
      }
    } else {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < cells; ++c) {
        if (active[c]) mx = std::max(mx, lp[c]);
      }
      double sum = 0.0;
      for (std::size_t c = 0; c < cells; ++c) {
        if (active[c]) sum += std::exp(lp[c] - mx);
      }
      const double shift = -mx - std::log(sum);
      for (std::size_t c = 0; c < cells; ++c) {
        if (active[c]) lp[c] += shift;
      }
    }
  };
  renormalize(logp);

  MirrorDescentResult res;
  std::vector<double> next(cells);
  double change = std::numeric_limits<double>::infinity();
  for (res.iterations = 0; res.iterations < iters && change > tol; ++res.iterations) {
    std::vector<double> log_fiber_mass(bins, 0.0);
    if (kl) {
      std::vector<double> p(cells, 0.0);
      for (std::size_t c = 0; c < cells; ++c) p[c] = active[c] ? std::exp(logp[c]) : 0.0;
      const auto sums = fiber_sums(prob, p);
      for (std::size_t b = 0; b < bins; ++b) log_fiber_mass[b] = sums[b] > 0.0 ? std::log(sums[b]) : 0.0;
    }
    for (std::size_t c = 0; c < cells; ++c) {
      if (!active[c]) {
        next[c] = logp[c];
        continue;
      }
      double grad = 0.0;
      if (kl) {
        const auto b = prob.fiber_of_cell[c];
        grad = (log_fiber_mass[b] - std::log(prob.target[b]) + 1.0) +
               kl->alpha * (logp[c] - std::log(kl->prior[c]) + 1.0);
      } else {
        grad = logp[c] + 1.0;
      }
      next[c] = logp[c] - step * grad;
    }
    renormalize(next);
    change = 0.0;
    for (std::size_t c = 0; c < cells; ++c) {
      if (active[c]) change = std::max(change, std::abs(next[c] - logp[c]));
    }
    logp.swap(next);
  }
  if (change > tol) {
    throw Error(ErrorCode::NotConverged, "mirror descent log-update " + std::to_string(change) + " after " +
                                             std::to_string(res.iterations) + " iterations");
  }

  res.masses.assign(cells, 0.0);
  for (std::size_t c = 0; c < cells; ++c) res.masses[c] = active[c] ? std::exp(logp[c]) : 0.0;
  const auto sums = fiber_sums(prob, res.masses);
  for (std::size_t b = 0; b < bins; ++b) res.constraint_residual += std::abs(sums[b] - prob.target[b]);
  if (kl) {
    for (std::size_t b = 0; b < bins; ++b) {
      if (sums[b] > 0.0) res.objective += xlogx_ratio(sums[b], prob.target[b]);
    }
    for (std::size_t c = 0; c < cells; ++c) {
      if (res.masses[c] > 0.0) res.objective += kl->alpha * xlogx_ratio(res.masses[c], kl->prior[c]);
    }
  } else {
    for (double p : res.masses) {
      if (p > 0.0) res.objective += p * std::log(p);
    }
  }
  return res;
}

BruteForceResult brute_force_ot(const ParticleMeasure& mu, const ParticleMeasure& nu, const Matrix& cost) {
  const std::size_t n = mu.size();
  if (nu.size() != n) throw Error(ErrorCode::InvalidArgument, "brute-force OT needs equal point counts");
  if (n > 7) throw Error(ErrorCode::TooLarge, "brute-force OT is limited to n <= 7");
  if (static_cast<std::size_t>(cost.rows()) != n || static_cast<std::size_t>(cost.cols()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "cost matrix shape does not match the measures");
  }
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(mu.weight(i) - w) > 1e-12 || std::abs(nu.weight(i) - w) > 1e-12) {
      throw Error(ErrorCode::InvalidArgument, "brute-force OT needs uniform weights");
    }
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  BruteForceResult best;
  best.objective = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i]));
    c *= w;
    if (c < best.objective) {
      best.objective = c;
      best.permutation = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  best.plan = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    best.plan(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(best.permutation[i])) = w;
  }
  return best;
}

Vector grid_argmin_oracle(const std::function<double(const Vector&)>& objective, const Domain& theta,
                          std::size_t resolution) {
  if (resolution < 2) throw Error(ErrorCode::InvalidArgument, "oracle resolution must be >= 2 per axis");
  const Box box = theta.bounding_box();
  if (!box.bounded()) throw Error(ErrorCode::InvalidDomain, "grid oracle needs a bounded domain");
  const std::size_t d = box.dim();
  std::vector<std::size_t> idx(d, 0);
  Vector x(static_cast<Eigen::Index>(d));
  Vector best;
  double best_val = std::numeric_limits<double>::infinity();
  const double denom = static_cast<double>(resolution - 1);
  for (;;) {
    for (std::size_t a = 0; a < d; ++a) {
      const auto i = static_cast<Eigen::Index>(a);
      x[i] = idx[a] + 1 == resolution ? box.upper[i]
                                      : box.lower[i] + (box.upper[i] - box.lower[i]) * static_cast<double>(idx[a]) / denom;
    }
    if (theta.contains(x)) {
      const double v = objective(x);
      if (v < best_val) {
        best_val = v;
        best = x;
      }
    }
    std::size_t a = d;
    while (a > 0) {
      --a;
      if (++idx[a] < resolution) break;
      idx[a] = 0;
      if (a == 0) {
        a = d + 1;
        break;
      }
    }
    if (a == d + 1) break;
  }
  if (best.size() == 0) throw Error(ErrorCode::InvalidDomain, "no lattice point falls inside the domain");
  return best;
}

double bessel_i0(double a) {
  if (!(a >= 0.0)) throw Error(ErrorCode::InvalidArgument, "bessel_i0 needs a >= 0");
  if (a > 700.0) throw Error(ErrorCode::InvalidArgument, "bessel_i0 argument above 700 overflows");
  const double q = 0.25 * a * a;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 10000; ++k) {
    term *= q / (static_cast<double>(k) * static_cast<double>(k));
    sum += term;
    if (term < 1e-15 * sum && static_cast<double>(k) > 0.5 * a) break;
  }
  return sum;
}

double bessel_i0_quadrature(double a, std::size_t points) {
  if (points == 0) throw Error(ErrorCode::InvalidArgument, "quadrature needs at least one point");
  double s = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    s += std::exp(a * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(points)));
  }
  return s / static_cast<double>(points);
}

}  // namespace minv
