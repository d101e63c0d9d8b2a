#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mospa::testing {

BruteOspa brute_ospa(const Vector& x, const Vector& x_hat, std::size_t n, std::size_t nx,
                     const Matrix* q) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  BruteOspa best{std::numeric_limits<double>::infinity(), perm};
  Vector moved(x_hat.size());
  do {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < nx; ++k) {
        moved[static_cast<Eigen::Index>(i * nx + k)] =
            x_hat[static_cast<Eigen::Index>(perm[i] * nx + k)];
      }
    }
    const Vector d = x - moved;
    const double v = q ? d.dot(*q * d) : d.dot(d);
    if (v < best.value) best = {v, perm};
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

// Flows of the basis `cells` (a spanning tree) by repeatedly fixing cells
// whose row or column has a single unresolved cell.
bool tree_flows(const std::vector<std::size_t>& cells, std::size_t m, std::size_t n,
                const std::vector<double>& a, const std::vector<double>& b,
                std::vector<double>& flow) {
  std::vector<double> ra(a), rb(b);
  std::vector<char> done(cells.size(), 0);
  flow.assign(cells.size(), 0.0);
  for (std::size_t round = 0; round < cells.size(); ++round) {
    std::vector<int> row_count(m, 0), col_count(n, 0);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (done[k]) continue;
      ++row_count[cells[k] / n];
      ++col_count[cells[k] % n];
    }
    bool progressed = false;
    for (std::size_t k = 0; k < cells.size() && !progressed; ++k) {
      if (done[k]) continue;
      const std::size_t i = cells[k] / n;
      const std::size_t j = cells[k] % n;
      if (row_count[i] == 1) {
        flow[k] = ra[i];
      } else if (col_count[j] == 1) {
        flow[k] = rb[j];
      } else {
        continue;
      }
      ra[i] -= flow[k];
      rb[j] -= flow[k];
      done[k] = 1;
      progressed = true;
    }
    if (!progressed) return false;
  }
  return true;
}

}  // namespace

double lp_vertex_transport(const Matrix& cost, const std::vector<double>& a,
                           const std::vector<double>& b) {
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  const std::size_t k = m + n - 1;
  const std::size_t total = m * n;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> flow;
  while (true) {
    UnionFind uf(m + n);
    bool tree = true;
    for (std::size_t c : idx) {
      if (!uf.unite(c / n, m + c % n)) {
        tree = false;
        break;
      }
    }
    if (tree && tree_flows(idx, m, n, a, b, flow)) {
      bool feasible = true;
      double v = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        if (flow[t] < -1e-12) feasible = false;
        v += flow[t] * cost(static_cast<Eigen::Index>(idx[t] / n),
                            static_cast<Eigen::Index>(idx[t] % n));
      }
      if (feasible) best = std::min(best, v);
    }
    // Next k-combination of [0, total).
    std::size_t p = k;
    while (p > 0 && idx[p - 1] == total - k + p - 1) --p;
    if (p == 0) break;
    ++idx[p - 1];
    for (std::size_t t = p; t < k; ++t) idx[t] = idx[t - 1] + 1;
  }
  return best;
}

Matrix random_feasible_plan(const std::vector<double>& a, const std::vector<double>& b, Rng& rng) {
  std::vector<std::size_t> rows(a.size()), cols(b.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  std::iota(cols.begin(), cols.end(), std::size_t{0});
  std::shuffle(rows.begin(), rows.end(), rng);
  std::shuffle(cols.begin(), cols.end(), rng);
  Matrix plan = Matrix::Zero(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  std::size_t r = 0, c = 0;
  double ra = a[rows[0]], rb = b[cols[0]];
  while (r < rows.size() && c < cols.size()) {
    const bool last_row = r + 1 == rows.size();
    const bool last_col = c + 1 == cols.size();
    double x;
    if (last_row && last_col) {
      x = ra;
    } else if (last_col || (!last_row && ra <= rb)) {
      x = ra;
    } else {
      x = rb;
    }
    plan(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[c])) += std::max(0.0, x);
    if (last_row && last_col) break;
    if (last_col || (!last_row && ra <= rb)) {
      rb -= ra;
      ra = a[rows[++r]];
    } else {
      ra -= rb;
      rb = b[cols[++c]];
    }
  }
  return plan;
}

GaussianMixtureMeasure random_mixture(Rng& rng, std::size_t n, std::size_t nx,
                                      std::size_t max_components, double spread) {
  const auto d = static_cast<Eigen::Index>(n * nx);
  std::uniform_int_distribution<std::size_t> count(1, max_components);
  std::uniform_real_distribution<double> u(0.2, 1.0);
  std::uniform_real_distribution<double> pos(-spread, spread);
  std::normal_distribution<double> g(0.0, 0.5);
  const std::size_t k = count(rng);
  std::vector<double> w(k);
  for (double& x : w) x = u(rng);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<GaussianComponent> comps;
  for (std::size_t c = 0; c < k; ++c) {
    Vector mean(d);
    for (Eigen::Index t = 0; t < d; ++t) mean[t] = pos(rng);
    Matrix a(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index s = 0; s < d; ++s) a(r, s) = g(rng);
    }
    Matrix cov = a * a.transpose() + 0.3 * Matrix::Identity(d, d);
    cov = 0.5 * (cov + cov.transpose());
    comps.push_back({w[c] / total, std::move(mean), std::move(cov)});
  }
  return GaussianMixtureMeasure(n, nx, std::move(comps));
}

StackedState random_estimate(Rng& rng, std::size_t n, std::size_t nx, double spread) {
  std::uniform_real_distribution<double> pos(-spread, spread);
  Vector v(static_cast<Eigen::Index>(n * nx));
  for (Eigen::Index t = 0; t < v.size(); ++t) v[t] = pos(rng);
  return StackedState(n, nx, v);
}

Matrix random_block_q(Rng& rng, std::size_t n, std::size_t nx) {
  std::normal_distribution<double> g;
  const auto b = static_cast<Eigen::Index>(nx);
  Matrix q = Matrix::Zero(static_cast<Eigen::Index>(n) * b, static_cast<Eigen::Index>(n) * b);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix a(b, b);
    for (Eigen::Index r = 0; r < b; ++r) {
      for (Eigen::Index s = 0; s < b; ++s) a(r, s) = g(rng);
    }
    Matrix block = a * a.transpose() + 0.5 * Matrix::Identity(b, b);
    block = 0.5 * (block + block.transpose());
    q.block(static_cast<Eigen::Index>(i) * b, static_cast<Eigen::Index>(i) * b, b, b) = block;
  }
  return q;
}

Scenario random_scenario(Rng& rng, std::size_t n, std::size_t nx, std::uint64_t seed,
                         std::size_t sample_count) {
  return Scenario{n, nx, random_mixture(rng, n, nx), std::nullopt, seed, sample_count};
}

GaussianMixtureMeasure mirrored_pair_mixture(double sigma) {
  const Matrix cov = sigma * sigma * Matrix::Identity(2, 2);
  return GaussianMixtureMeasure(2, 1,
                                {{0.5, Eigen::Vector2d(-4.0, 3.0), cov},
                                 {0.5, Eigen::Vector2d(3.0, -4.0), cov}});
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace mospa::testing
