#include "mospa/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mospa/error.hpp"
#include "mospa/metric.hpp"

namespace mospa {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

double row_order_cost(std::span<const double> cost, std::size_t n,
                      std::span<const std::size_t> mapping) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += cost[i * n + mapping[i]];
  return s;
}

}  // namespace

CostMatrix::CostMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() == 0 || entries_.rows() != entries_.cols()) {
    throw InvalidArgument("cost matrix must be square and non-empty, got " +
                          std::to_string(entries_.rows()) + "x" + std::to_string(entries_.cols()));
  }
  if (!entries_.allFinite()) throw InvalidArgument("cost matrix has non-finite entries");
  if (entries_.minCoeff() < 0.0) throw InvalidArgument("cost matrix has negative entries");
}

double AssignmentSolver::solve(std::span<const double> cost, std::size_t n,
                               std::span<std::size_t> out) {
  if (n == 1) {
    out[0] = 0;
    return cost[0];
  }
  if (n == 2) {
    const double keep = cost[0] + cost[3];
    const double swap = cost[1] + cost[2];
    if (keep <= swap) {
      out[0] = 0;
      out[1] = 1;
      return keep;
    }
    out[0] = 1;
    out[1] = 0;
    return swap;
  }
  return solve_general(cost, n, out);
}

double AssignmentSolver::solve_general(std::span<const double> cost, std::size_t n,
                                       std::span<std::size_t> out) {
  n_ = n;
  constexpr double inf = std::numeric_limits<double>::infinity();
  u_.assign(n + 1, 0.0);
  v_.assign(n + 1, 0.0);
  p_.assign(n + 1, 0);
  way_.assign(n + 1, 0);

  // Rows and columns are 1-based inside the potential arrays; slot 0 is the
  // virtual column used while growing the alternating tree.
  for (std::size_t i = 1; i <= n; ++i) {
    p_[0] = i;
    std::size_t j0 = 0;
    minv_.assign(n + 1, inf);
    used_.assign(n + 1, 0);
    do {
      used_[j0] = 1;
      const std::size_t i0 = p_[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used_[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u_[i0] - v_[j];
        if (cur < minv_[j]) {
          minv_[j] = cur;
          way_[j] = j0;
        }
        if (minv_[j] < delta) {
          delta = minv_[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used_[j]) {
          u_[p_[j]] += delta;
          v_[j] -= delta;
        } else {
          minv_[j] -= delta;
        }
      }
      j0 = j1;
    } while (p_[j0] != 0);
    do {
      const std::size_t j1 = way_[j0];
      p_[j0] = p_[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  row_to_col_.assign(n, kNone);
  col_to_row_.assign(n, kNone);
  for (std::size_t j = 1; j <= n; ++j) {
    row_to_col_[p_[j] - 1] = j - 1;
    col_to_row_[j - 1] = p_[j] - 1;
  }

  const double hungarian_cost = row_order_cost(cost, n, row_to_col_);
  std::copy(row_to_col_.begin(), row_to_col_.end(), out.begin());

  if (lexicographic_refine(cost, n)) {
    const double lex_cost = row_order_cost(cost, n, row_to_col_);
    const double slack = 8.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() *
                         std::max(1.0, std::abs(hungarian_cost));
    if (lex_cost <= hungarian_cost + slack) {
      std::copy(row_to_col_.begin(), row_to_col_.end(), out.begin());
      return lex_cost;
    }
  }
  return hungarian_cost;
}

// Every optimal assignment uses only edges with zero reduced cost under the
// optimal potentials. Walk rows in order and give each the smallest tight
// column that still admits a perfect tight matching of the remaining rows.
bool AssignmentSolver::lexicographic_refine(std::span<const double> cost, std::size_t n) {
  double max_c = 0.0;
  for (double c : cost.first(n * n)) max_c = std::max(max_c, std::abs(c));
  const double tol = 1e-12 * (1.0 + max_c);

  tight_.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      tight_[i * n + j] = (cost[i * n + j] - u_[i + 1] - v_[j + 1]) <= tol;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!tight_[i * n + row_to_col_[i]]) return false;
  }

  locked_.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < n; ++j) {
      if (locked_[j] || !tight_[r * n + j]) continue;
      if (row_to_col_[r] == j) {
        locked_[j] = 1;
        break;
      }
      const std::size_t r2 = col_to_row_[j];
      const std::size_t j0 = row_to_col_[r];
      row_to_col_[r] = j;
      col_to_row_[j] = r;
      row_to_col_[r2] = kNone;
      col_to_row_[j0] = kNone;
      locked_[j] = 1;
      visited_.assign(n, 0);
      if (augment_tight(r2, j0, r + 1, j)) break;
      row_to_col_[r] = j0;
      col_to_row_[j0] = r;
      row_to_col_[r2] = j;
      col_to_row_[j] = r2;
      locked_[j] = 0;
    }
  }
  return true;
}

bool AssignmentSolver::augment_tight(std::size_t row, std::size_t target_col,
                                     std::size_t first_free_row, std::size_t banned_col) {
  const std::size_t n = n_;
  for (std::size_t b = 0; b < n; ++b) {
    if (locked_[b] || b == banned_col || visited_[b] || !tight_[row * n + b]) continue;
    visited_[b] = 1;
    const std::size_t holder = col_to_row_[b];
    if (holder == kNone) {
      if (b != target_col) continue;
    } else if (holder < first_free_row ||
               !augment_tight(holder, target_col, first_free_row, banned_col)) {
      continue;
    }
    row_to_col_[row] = b;
    col_to_row_[b] = row;
    return true;
  }
  return false;
}

AssignmentResult solve_assignment(const CostMatrix& c) {
  const std::size_t n = c.n();
  std::vector<double> rm(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) rm[i * n + j] = c(i, j);
  }
  std::vector<std::size_t> mapping(n);
  AssignmentSolver solver;
  const double total = solver.solve(rm, n, mapping);
  return {Permutation(std::move(mapping)), total};
}

AssignmentResult brute_force_assignment(const CostMatrix& c, std::size_t cap) {
  const std::size_t n = c.n();
  if (n > cap) {
    throw CapacityError("brute_force_assignment: n = " + std::to_string(n) + " exceeds cap " +
                        std::to_string(cap) + " (" + std::to_string(n) + "! permutations)");
  }
  std::vector<std::size_t> m(n);
  std::iota(m.begin(), m.end(), std::size_t{0});
  std::vector<std::size_t> best = m;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += c(i, m[i]);
    if (s < best_cost) {
      best_cost = s;
      best = m;
    }
  } while (std::next_permutation(m.begin(), m.end()));
  return {Permutation(std::move(best)), best_cost};
}

void check_compatible(const StackedState& x, const StackedState& x_hat,
                      const std::optional<QuadraticForm>& q) {
  if (!x.same_shape(x_hat)) {
    throw InvalidArgument("state shapes differ: " + std::to_string(x.n_targets()) + "x" +
                          std::to_string(x.state_dim()) + " vs " +
                          std::to_string(x_hat.n_targets()) + "x" +
                          std::to_string(x_hat.state_dim()));
  }
  if (q && (q->n_targets() != x.n_targets() || q->state_dim() != x.state_dim())) {
    throw UnsupportedMetric("quadratic form was built for " + std::to_string(q->n_targets()) +
                            " targets of dimension " + std::to_string(q->state_dim()));
  }
}

AssignmentResult optimal_permutation(const StackedState& x, const StackedState& x_hat,
                                     const std::optional<QuadraticForm>& q) {
  check_compatible(x, x_hat, q);
  Aligner aligner(x_hat, q);
  std::vector<std::size_t> mapping(x.n_targets());
  const double total = aligner.align(x.data(), mapping);
  return {Permutation(std::move(mapping)), total};
}

}  // namespace mospa
