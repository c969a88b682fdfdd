#include "minv/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "minv/error.hpp"

namespace minv {

Matrix cost_matrix(const Matrix& x, const Matrix& y, double p) {
  if (x.cols() != y.cols()) throw Error(ErrorCode::DimensionMismatch, "cost matrix point sets differ in dimension");
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidArgument, "cost exponent must be >= 1");
  Matrix c(x.rows(), y.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.rows(); ++j) {
      const double d = (x.row(i) - y.row(j)).norm();
      c(i, j) = p == 2.0 ? d * d : (p == 1.0 ? d : std::pow(d, p));
    }
  }
  return c;
}

namespace {

// Support of a marginal after dropping zero-mass entries.
struct Support {
  std::vector<std::size_t> index;
  std::vector<double> mass;
};

Support compress(std::span<const double> w, const char* which) {
  Support s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0) || !std::isfinite(w[i])) {
      throw Error(ErrorCode::InvalidMeasure, std::string(which) + " marginal has a negative or non-finite entry");
    }
    if (w[i] > 0.0) {
      s.index.push_back(i);
      s.mass.push_back(w[i]);
    }
  }
  if (s.index.empty()) throw Error(ErrorCode::ZeroMass, std::string(which) + " marginal has no mass");
  return s;
}

void balance(Support& src, Support& dst) {
  double sa = 0.0, sb = 0.0;
  for (double v : src.mass) sa += v;
  for (double v : dst.mass) sb += v;
  if (std::abs(sa - sb) > 1e-9 * std::max(sa, sb)) {
    throw Error(ErrorCode::InvalidArgument, "marginals have different total mass");
  }
  for (double& v : dst.mass) v *= sa / sb;
}

void check_cost(std::span<const double> a, std::span<const double> b, const Matrix& cost) {
  if (static_cast<std::size_t>(cost.rows()) != a.size() || static_cast<std::size_t>(cost.cols()) != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cost matrix shape does not match the marginals");
  }
  if (!cost.allFinite()) throw Error(ErrorCode::InvalidArgument, "cost matrix must be finite");
}

// Transportation simplex on a spanning-tree basis of m + n − 1 arcs.
class TransportationSimplex {
 public:
  TransportationSimplex(const Support& rows, const Support& cols, const Matrix& cost)
      : m_(rows.index.size()), n_(cols.index.size()), cost_(m_, n_) {
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        cost_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            cost(static_cast<Eigen::Index>(rows.index[i]), static_cast<Eigen::Index>(cols.index[j]));
      }
    }
    north_west_corner(rows.mass, cols.mass);
  }

  std::size_t solve(std::size_t max_pivots) {
    const double cmax = cost_.cwiseAbs().maxCoeff();
    const double tol = 1e-12 * std::max(1.0, cmax);
    std::size_t pivots = 0;
    for (;;) {
      build_tree();
      double best = -tol;
      std::size_t bi = 0, bj = 0;
      bool found = false;
      for (std::size_t i = 0; i < m_; ++i) {
        const double ui = pot_[i];
        for (std::size_t j = 0; j < n_; ++j) {
          const double rc = cost_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - ui - pot_[m_ + j];
          if (rc < best) {
            best = rc;
            bi = i;
            bj = j;
            found = true;
          }
        }
      }
      if (!found) return pivots;
      if (pivots++ >= max_pivots) {
        throw Error(ErrorCode::SolverStall, "network simplex exceeded its pivot budget");
      }
      pivot(bi, bj);
    }
  }

  [[nodiscard]] Matrix plan() const {
    Matrix p = Matrix::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(n_));
    for (const auto& arc : arcs_) {
      if (arc.alive) p(static_cast<Eigen::Index>(arc.row), static_cast<Eigen::Index>(arc.col)) = std::max(arc.flow, 0.0);
    }
    return p;
  }

 private:
  struct Arc {
    std::size_t row;
    std::size_t col;
    double flow;
    bool alive;
  };

  void add_arc(std::size_t i, std::size_t j, double flow) {
    const std::size_t id = arcs_.size();
    arcs_.push_back({i, j, flow, true});
    adj_[i].push_back(id);
    adj_[m_ + j].push_back(id);
  }

  void remove_arc(std::size_t id) {
    Arc& arc = arcs_[id];
    arc.alive = false;
    for (std::size_t node : {arc.row, m_ + arc.col}) {
      auto& list = adj_[node];
      list.erase(std::find(list.begin(), list.end(), id));
    }
  }

  void north_west_corner(std::vector<double> s, std::vector<double> d) {
    adj_.assign(m_ + n_, {});
    std::size_t i = 0, j = 0;
    for (;;) {
      const double x = std::min(s[i], d[j]);
      add_arc(i, j, x);
      if (i + 1 == m_ && j + 1 == n_) break;
      const bool row_done = (j + 1 == n_) || (i + 1 < m_ && s[i] <= d[j]);
      if (row_done) {
        d[j] = std::max(d[j] - x, 0.0);
        s[i] = 0.0;
        ++i;
      } else {
        s[i] = std::max(s[i] - x, 0.0);
        d[j] = 0.0;
        ++j;
      }
    }
  }

  // Potentials (u for rows, v for columns) with u_0 = 0, plus parent links.
  void build_tree() {
    const std::size_t nodes = m_ + n_;
    pot_.assign(nodes, 0.0);
    parent_arc_.assign(nodes, kNone);
    parent_.assign(nodes, kNone);
    depth_.assign(nodes, 0);
    std::vector<char> seen(nodes, 0);
    std::vector<std::size_t> queue{0};
    seen[0] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t u = queue[head];
      for (std::size_t id : adj_[u]) {
        const Arc& arc = arcs_[id];
        const std::size_t w = (u < m_) ? m_ + arc.col : arc.row;
        if (seen[w]) continue;
        seen[w] = 1;
        const double c = cost_(static_cast<Eigen::Index>(arc.row), static_cast<Eigen::Index>(arc.col));
        pot_[w] = c - pot_[u];
        parent_[w] = u;
        parent_arc_[w] = id;
        depth_[w] = depth_[u] + 1;
        queue.push_back(w);
      }
    }
    if (queue.size() != nodes) throw Error(ErrorCode::SolverStall, "transport basis is not a spanning tree");
  }

  void pivot(std::size_t i, std::size_t j) {
    // Cycle: entering arc (i, j) then the tree path from column j back to row i.
    std::vector<std::size_t> from_col, from_row;
    std::size_t a = m_ + j, b = i;
    while (depth_[a] > depth_[b]) {
      from_col.push_back(parent_arc_[a]);
      a = parent_[a];
    }
    while (depth_[b] > depth_[a]) {
      from_row.push_back(parent_arc_[b]);
      b = parent_[b];
    }
    while (a != b) {
      from_col.push_back(parent_arc_[a]);
      a = parent_[a];
      from_row.push_back(parent_arc_[b]);
      b = parent_[b];
    }
    std::vector<std::size_t> path = from_col;
    path.insert(path.end(), from_row.rbegin(), from_row.rend());

    // Odd positions along the path (1st, 3rd, ...) lose flow.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leaving = kNone;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const double f = arcs_[path[k]].flow;
      if (f < theta) {
        theta = f;
        leaving = path[k];
      }
    }
    theta = std::max(theta, 0.0);
    for (std::size_t k = 0; k < path.size(); ++k) {
      arcs_[path[k]].flow += (k % 2 == 0) ? -theta : theta;
    }
    remove_arc(leaving);
    add_arc(i, j, theta);
  }

  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::size_t m_;
  std::size_t n_;
  Matrix cost_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<double> pot_;
  std::vector<std::size_t> parent_arc_;
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> depth_;
};

TransportPlan expand(const Support& rows, const Support& cols, const Matrix& reduced, std::size_t m, std::size_t n,
                     const Matrix& cost, std::size_t iterations) {
  TransportPlan plan;
  plan.coupling = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < rows.index.size(); ++i) {
    for (std::size_t j = 0; j < cols.index.size(); ++j) {
      plan.coupling(static_cast<Eigen::Index>(rows.index[i]), static_cast<Eigen::Index>(cols.index[j])) =
          reduced(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  plan.objective = (plan.coupling.array() * cost.array()).sum();
  plan.iterations = iterations;
  return plan;
}

double log_sum_exp(const double* v, std::size_t n, std::size_t stride) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) mx = std::max(mx, v[k * stride]);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += std::exp(v[k * stride] - mx);
  return mx + std::log(s);
}

}  // namespace

TransportPlan exact_ot(std::span<const double> a, std::span<const double> b, const Matrix& cost,
                       const ExactOtOptions& opts) {
  check_cost(a, b, cost);
  Support rows = compress(a, "source");
  Support cols = compress(b, "target");
  balance(rows, cols);
  TransportationSimplex simplex(rows, cols, cost);
  const std::size_t mn = rows.index.size() + cols.index.size();
  const std::size_t budget = opts.max_pivots ? opts.max_pivots : 50 * mn * mn + 10000;
  const std::size_t pivots = simplex.solve(budget);
  return expand(rows, cols, simplex.plan(), a.size(), b.size(), cost, pivots);
}

TransportPlan exact_ot(const ParticleMeasure& mu, const ParticleMeasure& nu, const Matrix& cost,
                       const ExactOtOptions& opts) {
  return exact_ot(std::span<const double>(mu.weights().data(), mu.size()),
                  std::span<const double>(nu.weights().data(), nu.size()), cost, opts);
}

TransportPlan sinkhorn(std::span<const double> a, std::span<const double> b, const Matrix& cost,
                       const SinkhornOptions& opts) {
  check_cost(a, b, cost);
  if (!(opts.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "sinkhorn epsilon must be positive");
  Support rows = compress(a, "source");
  Support cols = compress(b, "target");
  balance(rows, cols);
  const std::size_t m = rows.index.size();
  const std::size_t n = cols.index.size();

  // Row-major reduced cost for cache-friendly row sweeps; a transposed copy for columns.
  std::vector<double> c(m * n), ct(n * m);
  double cmax = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = cost(static_cast<Eigen::Index>(rows.index[i]), static_cast<Eigen::Index>(cols.index[j]));
      c[i * n + j] = v;
      ct[j * m + i] = v;
      cmax = std::max(cmax, std::abs(v));
    }
  }
  std::vector<double> log_a(m), log_b(n);
  for (std::size_t i = 0; i < m; ++i) log_a[i] = std::log(rows.mass[i]);
  for (std::size_t j = 0; j < n; ++j) log_b[j] = std::log(cols.mass[j]);

  std::vector<double> f(m, 0.0), g(n, 0.0), buf(std::max(m, n));
  std::vector<double> eps_ladder;
  if (opts.epsilon_scaling) {
    for (double e = std::max(cmax, opts.epsilon); e > opts.epsilon; e *= 0.5) eps_ladder.push_back(e);
  }
  eps_ladder.push_back(opts.epsilon);

  auto row_error = [&](double eps) {
    double err = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) buf[j] = (f[i] + g[j] - c[i * n + j]) / eps;
      err += std::abs(std::exp(log_sum_exp(buf.data(), n, 1)) - rows.mass[i]);
    }
    return err;
  };

  std::size_t iterations = 0;
  double err = std::numeric_limits<double>::infinity();
  for (std::size_t stage = 0; stage < eps_ladder.size(); ++stage) {
    const double eps = eps_ladder[stage];
    const bool last = stage + 1 == eps_ladder.size();
    const double stage_tol = last ? opts.tolerance : 1e-4;
    for (;;) {
      if (iterations >= opts.max_iter) break;
      ++iterations;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) buf[j] = (g[j] - c[i * n + j]) / eps;
        f[i] = eps * (log_a[i] - log_sum_exp(buf.data(), n, 1));
      }
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) buf[i] = (f[i] - ct[j * m + i]) / eps;
        g[j] = eps * (log_b[j] - log_sum_exp(buf.data(), m, 1));
      }
      err = row_error(eps);
      if (err <= stage_tol) break;
    }
  }
  if (err > 1e-6) {
    throw Error(ErrorCode::NotConverged, "sinkhorn marginal error " + std::to_string(err) + " after " +
                                             std::to_string(iterations) + " iterations");
  }
  Matrix reduced(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      reduced(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::exp((f[i] + g[j] - c[i * n + j]) / opts.epsilon);
    }
  }
  return expand(rows, cols, reduced, a.size(), b.size(), cost, iterations);
}

TransportPlan sinkhorn(const ParticleMeasure& mu, const ParticleMeasure& nu, const Matrix& cost,
                       const SinkhornOptions& opts) {
  return sinkhorn(std::span<const double>(mu.weights().data(), mu.size()),
                  std::span<const double>(nu.weights().data(), nu.size()), cost, opts);
}

double transport_cost(const ParticleMeasure& mu, const ParticleMeasure& nu, double p, OtMethod method) {
  const Matrix cost = cost_matrix(mu.points(), nu.points(), p);
  if (method.kind == OtMethod::Kind::Exact) return exact_ot(mu, nu, cost).objective;
  SinkhornOptions opts;
  opts.epsilon = method.epsilon;
  return sinkhorn(mu, nu, cost, opts).objective;
}

double wasserstein_p(const ParticleMeasure& mu, const ParticleMeasure& nu, double p, OtMethod method) {
  return std::pow(std::max(transport_cost(mu, nu, p, method), 0.0), 1.0 / p);
}

}  // namespace minv
