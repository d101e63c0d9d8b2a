#include "mospa/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mospa/error.hpp"
#include "mospa/parallel.hpp"

namespace mospa {
namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr double kMarginalTol = 1e-9;

// Spanning-tree transportation simplex. Nodes 0..m-1 are sources, m..m+n-1
// sinks; the last sink is the root. Every non-root node stores the flow on
// the tree arc to its parent, and potentials satisfy
// pot[source] + pot[sink] == cost on every tree arc.
class TransportSimplex {
 public:
  TransportSimplex(const std::vector<double>& cost, std::size_t m, std::size_t n)
      : cost_(cost), m_(m), n_(n) {
    const std::size_t v = m + n;
    parent_.assign(v, kNone);
    flow_.assign(v, 0.0);
    depth_.assign(v, 0);
    pot_.assign(v, 0.0);
    first_child_.assign(v, kNone);
    next_sib_.assign(v, kNone);
    prev_sib_.assign(v, kNone);
    double max_c = 0.0;
    for (double c : cost_) max_c = std::max(max_c, std::abs(c));
    rc_tol_ = 1e-12 * std::max(1.0, max_c);
  }

  // Staircase basis over sources ordered by their cheapest sink, so that
  // most mass starts on a nearly optimal arc.
  void initial_basis(const std::vector<double>& supply, const std::vector<double>& demand) {
    std::vector<std::size_t> nearest(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const double* row = &cost_[i * n_];
      nearest[i] = static_cast<std::size_t>(std::min_element(row, row + n_) - row);
    }
    std::vector<std::size_t> order(m_);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return nearest[a] < nearest[b]; });

    struct Cell {
      std::size_t src, snk;
      double flow;
    };
    std::vector<Cell> cells;
    cells.reserve(m_ + n_ - 1);
    std::size_t ii = 0, j = 0;
    double ra = supply[order[0]];
    double rb = demand[0];
    while (true) {
      const std::size_t i = order[ii];
      if (ii == m_ - 1 && j == n_ - 1) {
        cells.push_back({i, j, std::max(0.0, ra)});
        break;
      }
      const bool advance_source = (j == n_ - 1) || (ii != m_ - 1 && ra < rb);
      if (advance_source) {
        cells.push_back({i, j, std::max(0.0, ra)});
        rb -= ra;
        ra = supply[order[++ii]];
      } else {
        cells.push_back({i, j, std::max(0.0, rb)});
        ra -= rb;
        rb = demand[++j];
      }
    }

    // Orient the tree from the root.
    const std::size_t v = m_ + n_;
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(v);
    for (const auto& c : cells) {
      adj[c.src].push_back({m_ + c.snk, c.flow});
      adj[m_ + c.snk].push_back({c.src, c.flow});
    }
    const std::size_t root = v - 1;
    std::vector<char> seen(v, 0);
    std::vector<std::size_t> queue{root};
    seen[root] = 1;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const std::size_t u = queue[h];
      for (const auto& [w, f] : adj[u]) {
        if (seen[w]) continue;
        seen[w] = 1;
        parent_[w] = u;
        flow_[w] = f;
        depth_[w] = depth_[u] + 1;
        pot_[w] = arc_cost(w, u) - pot_[u];
        attach(w, u);
        queue.push_back(w);
      }
    }
    if (queue.size() != v) throw NumericalError("transport: initial basis is not a spanning tree");
  }

  // Returns the number of pivots.
  std::size_t optimize(std::size_t max_pivots) {
    const std::size_t arcs = m_ * n_;
    const std::size_t block =
        std::max<std::size_t>(std::min<std::size_t>(arcs, 2 * n_ + 8),
                              static_cast<std::size_t>(std::sqrt(static_cast<double>(arcs))));
    std::size_t cursor = 0;
    std::size_t pivots = 0;
    while (true) {
      std::size_t best = kNone;
      double best_rc = -rc_tol_;
      std::size_t in_block = 0;
      std::size_t i = cursor / n_;
      std::size_t j = cursor % n_;
      for (std::size_t scanned = 0; scanned < arcs; ++scanned) {
        const double rc = cost_[i * n_ + j] - pot_[i] - pot_[m_ + j];
        if (rc < best_rc) {
          best_rc = rc;
          best = i * n_ + j;
        }
        if (++j == n_) {
          j = 0;
          if (++i == m_) i = 0;
        }
        if (++in_block == block) {
          if (best != kNone) break;
          in_block = 0;
        }
      }
      if (best == kNone) return pivots;
      cursor = i * n_ + j;
      pivot(best / n_, m_ + best % n_);
      if (++pivots > max_pivots) {
        throw NumericalError("transport: pivot limit exceeded (" + std::to_string(max_pivots) +
                             ")");
      }
    }
  }

  // Re-solves the basic flows for the given marginals by peeling leaves.
  // Returns false when a basic flow is clearly negative.
  bool extract(const std::vector<double>& supply, const std::vector<double>& demand,
               Matrix& flows) const {
    const std::size_t v = m_ + n_;
    const std::size_t root = v - 1;
    std::vector<std::size_t> order;
    order.reserve(v);
    std::vector<std::size_t> stack{root};
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      order.push_back(u);
      for (std::size_t c = first_child_[u]; c != kNone; c = next_sib_[c]) stack.push_back(c);
    }
    double scale = 0.0;
    for (double a : supply) scale = std::max(scale, a);
    for (double b : demand) scale = std::max(scale, b);
    const double neg_tol = 1e-10 * scale;

    std::vector<double> excess(v, 0.0);
    for (std::size_t i = 0; i < m_; ++i) excess[i] = supply[i];
    for (std::size_t j = 0; j < n_; ++j) excess[m_ + j] = -demand[j];
    flows.setZero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(n_));
    for (std::size_t k = order.size(); k-- > 1;) {
      const std::size_t u = order[k];
      const std::size_t p = parent_[u];
      const bool is_source = u < m_;
      const double f = is_source ? excess[u] : -excess[u];
      if (f < -neg_tol) return false;
      const std::size_t src = is_source ? u : p;
      const std::size_t snk = (is_source ? p : u) - m_;
      flows(static_cast<Eigen::Index>(src), static_cast<Eigen::Index>(snk)) = std::max(0.0, f);
      excess[p] += excess[u];
    }
    return true;
  }

 private:
  double arc_cost(std::size_t a, std::size_t b) const {
    const std::size_t src = a < m_ ? a : b;
    const std::size_t snk = (a < m_ ? b : a) - m_;
    return cost_[src * n_ + snk];
  }

  void attach(std::size_t child, std::size_t p) {
    next_sib_[child] = first_child_[p];
    prev_sib_[child] = kNone;
    if (first_child_[p] != kNone) prev_sib_[first_child_[p]] = child;
    first_child_[p] = child;
  }

  void detach(std::size_t child) {
    const std::size_t p = parent_[child];
    if (prev_sib_[child] != kNone) {
      next_sib_[prev_sib_[child]] = next_sib_[child];
    } else {
      first_child_[p] = next_sib_[child];
    }
    if (next_sib_[child] != kNone) prev_sib_[next_sib_[child]] = prev_sib_[child];
    next_sib_[child] = prev_sib_[child] = kNone;
  }

  // Entering arc source -> sink. The cycle runs source -> sink along the new
  // arc, then back through the tree; tree arcs traversed sink -> source lose
  // flow.
  void pivot(std::size_t source, std::size_t sink) {
    source_side_.clear();
    sink_side_.clear();
    std::size_t a = source, b = sink;
    while (a != b) {
      if (depth_[a] >= depth_[b]) {
        source_side_.push_back(a);
        a = parent_[a];
      } else {
        sink_side_.push_back(b);
        b = parent_[b];
      }
    }

    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave_pos = kNone;
    bool leave_on_source_side = false;
    // Walking up from the sink, a sink child means sink -> source traversal.
    for (std::size_t k = 0; k < sink_side_.size(); ++k) {
      const std::size_t u = sink_side_[k];
      if (u >= m_ && flow_[u] < theta) {
        theta = flow_[u];
        leave_pos = k;
        leave_on_source_side = false;
      }
    }
    // Descending to the source, a source child means sink -> source traversal.
    for (std::size_t k = 0; k < source_side_.size(); ++k) {
      const std::size_t u = source_side_[k];
      if (u < m_ && flow_[u] < theta) {
        theta = flow_[u];
        leave_pos = k;
        leave_on_source_side = true;
      }
    }
    if (leave_pos == kNone) throw NumericalError("transport: unbounded pivot");

    for (std::size_t u : sink_side_) flow_[u] += (u >= m_) ? -theta : theta;
    for (std::size_t u : source_side_) flow_[u] += (u < m_) ? -theta : theta;

    const std::vector<std::size_t>& side = leave_on_source_side ? source_side_ : sink_side_;
    const std::size_t q = leave_on_source_side ? source : sink;
    const std::size_t other = leave_on_source_side ? sink : source;

    // Reverse the path q = side[0] .. side[leave_pos]; it hangs from `other`.
    std::vector<double>& saved = path_flow_;
    saved.resize(leave_pos + 1);
    for (std::size_t t = 0; t <= leave_pos; ++t) saved[t] = flow_[side[t]];
    for (std::size_t t = 0; t <= leave_pos; ++t) detach(side[t]);
    for (std::size_t t = leave_pos; t >= 1; --t) {
      parent_[side[t]] = side[t - 1];
      flow_[side[t]] = saved[t - 1];
      attach(side[t], side[t - 1]);
    }
    parent_[q] = other;
    flow_[q] = theta;
    attach(q, other);

    // Refresh depth and potentials below q.
    stack_.clear();
    stack_.push_back(q);
    while (!stack_.empty()) {
      const std::size_t u = stack_.back();
      stack_.pop_back();
      const std::size_t p = parent_[u];
      depth_[u] = depth_[p] + 1;
      pot_[u] = arc_cost(u, p) - pot_[p];
      for (std::size_t c = first_child_[u]; c != kNone; c = next_sib_[c]) stack_.push_back(c);
    }
  }

  const std::vector<double>& cost_;
  std::size_t m_, n_;
  double rc_tol_;
  std::vector<std::size_t> parent_;
  std::vector<double> flow_;
  std::vector<std::size_t> depth_;
  std::vector<double> pot_;
  std::vector<std::size_t> first_child_, next_sib_, prev_sib_;
  std::vector<std::size_t> source_side_, sink_side_, stack_;
  std::vector<double> path_flow_;
};

void check_marginal(std::span<const double> w, const char* name) {
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw InvalidArgument(std::string("transport: ") + name +
                            " marginal has negative or non-finite entries");
    }
  }
}

}  // namespace

TransportPlan::TransportPlan(Matrix flows, std::vector<double> source_marginal,
                             std::vector<double> sink_marginal)
    : flows_(std::move(flows)),
      source_marginal_(std::move(source_marginal)),
      sink_marginal_(std::move(sink_marginal)) {
  if (static_cast<std::size_t>(flows_.rows()) != source_marginal_.size() ||
      static_cast<std::size_t>(flows_.cols()) != sink_marginal_.size()) {
    throw InvalidArgument("transport plan shape does not match its marginals");
  }
  if (!flows_.allFinite() || (flows_.size() > 0 && flows_.minCoeff() < 0.0)) {
    throw InvalidArgument("transport plan has negative or non-finite flows");
  }
  for (std::size_t i = 0; i < source_marginal_.size(); ++i) {
    const double s = flows_.row(static_cast<Eigen::Index>(i)).sum();
    if (std::abs(s - source_marginal_[i]) > kMarginalTol) {
      throw InvalidArgument("transport plan violates source marginal " + std::to_string(i) +
                            ": row sum " + std::to_string(s) + " vs " +
                            std::to_string(source_marginal_[i]));
    }
  }
  for (std::size_t j = 0; j < sink_marginal_.size(); ++j) {
    const double s = flows_.col(static_cast<Eigen::Index>(j)).sum();
    if (std::abs(s - sink_marginal_[j]) > kMarginalTol) {
      throw InvalidArgument("transport plan violates sink marginal " + std::to_string(j) +
                            ": column sum " + std::to_string(s) + " vs " +
                            std::to_string(sink_marginal_[j]));
    }
  }
}

TransportSolution solve_transportation_problem(const Matrix& cost, std::span<const double> supply,
                                               std::span<const double> demand) {
  if (static_cast<std::size_t>(cost.rows()) != supply.size() ||
      static_cast<std::size_t>(cost.cols()) != demand.size()) {
    throw InvalidArgument("transport: cost matrix is " + std::to_string(cost.rows()) + "x" +
                          std::to_string(cost.cols()) + " but marginals have sizes " +
                          std::to_string(supply.size()) + " and " +
                          std::to_string(demand.size()));
  }
  if (supply.empty() || demand.empty()) throw InvalidArgument("transport: empty marginal");
  if (!cost.allFinite()) throw InvalidArgument("transport: non-finite costs");
  check_marginal(supply, "source");
  check_marginal(demand, "sink");
  const double total_supply = std::accumulate(supply.begin(), supply.end(), 0.0);
  const double total_demand = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (!(total_supply > 0.0) || !(total_demand > 0.0)) {
    throw InvalidArgument("transport: degenerate all-zero marginal");
  }
  if (std::abs(total_supply - total_demand) > kMarginalTol) {
    throw InvalidArgument("transport: marginal totals differ (" + std::to_string(total_supply) +
                          " vs " + std::to_string(total_demand) + ")");
  }

  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < supply.size(); ++i) {
    if (supply[i] > 0.0) rows.push_back(i);
  }
  for (std::size_t j = 0; j < demand.size(); ++j) {
    if (demand[j] > 0.0) cols.push_back(j);
  }
  const std::size_t m = rows.size();
  const std::size_t n = cols.size();

  std::vector<double> c(m * n);
  std::vector<double> a(m), b(n);
  double min_mass = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    a[i] = supply[rows[i]];
    min_mass = std::min(min_mass, a[i]);
    for (std::size_t j = 0; j < n; ++j) {
      c[i * n + j] = cost(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  }
  const double rescale = total_supply / total_demand;
  for (std::size_t j = 0; j < n; ++j) {
    b[j] = demand[cols[j]] * rescale;
    min_mass = std::min(min_mass, b[j]);
  }

  Matrix reduced;
  std::size_t pivots = 0;
  double eps = 1e-6 * min_mass / static_cast<double>(m + n);
  bool solved = false;
  for (int attempt = 0; attempt < 3 && !solved; ++attempt, eps *= 1e-3) {
    std::vector<double> pa(a), pb(b);
    for (double& x : pa) x += eps;
    pb.back() += static_cast<double>(m) * eps;
    TransportSimplex simplex(c, m, n);
    simplex.initial_basis(pa, pb);
    pivots += simplex.optimize(20 * m * n + 10000);
    solved = simplex.extract(a, b, reduced);
  }
  if (!solved) throw NumericalError("transport: optimal basis infeasible for the exact marginals");

  Matrix flows = Matrix::Zero(cost.rows(), cost.cols());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      flows(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j])) =
          reduced(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  const double total = plan_cost(flows, cost);
  TransportPlan plan(std::move(flows), {supply.begin(), supply.end()},
                     {demand.begin(), demand.end()});
  return TransportSolution{std::move(plan), total, pivots};
}

Matrix transport_cost_matrix(const EmpiricalMeasure& sources, const DiscreteMeasure& sinks,
                             const std::optional<QuadraticForm>& q) {
  if (sources.n_targets() != sinks.n_targets() || sources.state_dim() != sinks.state_dim()) {
    throw InvalidArgument("transport: source and sink points differ in dimension");
  }
  if (q && (q->n_targets() != sources.n_targets() || q->state_dim() != sources.state_dim())) {
    throw UnsupportedMetric("transport: quadratic form shape does not match the points");
  }
  const auto n = static_cast<Eigen::Index>(sinks.size());
  Matrix c(static_cast<Eigen::Index>(sources.size()), n);
  parallel::for_each_chunk(sources.size(), [&](std::size_t, std::size_t b, std::size_t e) {
    Vector diff(static_cast<Eigen::Index>(sources.dim()));
    for (std::size_t i = b; i < e; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        diff = sources.column(i) - sinks.atoms()[static_cast<std::size_t>(j)].data();
        c(static_cast<Eigen::Index>(i), j) = q ? q->stacked_form(diff) : diff.squaredNorm();
      }
    }
  });
  return c;
}

double plan_cost(const Matrix& flows, const Matrix& cost) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < flows.rows(); ++i) {
    for (Eigen::Index j = 0; j < flows.cols(); ++j) {
      const double f = flows(i, j);
      if (f != 0.0) s += f * cost(i, j);
    }
  }
  return s;
}

TransportSolution solve_transport(const EmpiricalMeasure& sources, const DiscreteMeasure& sinks,
                                  const std::optional<QuadraticForm>& q) {
  const Matrix c = transport_cost_matrix(sources, sinks, q);
  return solve_transportation_problem(c, sources.weights(), sinks.masses());
}

double coupling_cost(const TransportPlan& plan, const EmpiricalMeasure& sources,
                     const DiscreteMeasure& sinks, const std::optional<QuadraticForm>& q) {
  if (plan.n_sources() != sources.size() || plan.n_sinks() != sinks.size()) {
    throw InvalidArgument("coupling_cost: plan is " + std::to_string(plan.n_sources()) + "x" +
                          std::to_string(plan.n_sinks()) + " but the measures have " +
                          std::to_string(sources.size()) + " and " +
                          std::to_string(sinks.size()) + " points");
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const double s = plan.flows().row(static_cast<Eigen::Index>(i)).sum();
    if (std::abs(s - sources.weight(i)) > kMarginalTol) {
      throw InvalidArgument("coupling_cost: plan violates source marginal " + std::to_string(i));
    }
  }
  for (std::size_t j = 0; j < sinks.size(); ++j) {
    const double s = plan.flows().col(static_cast<Eigen::Index>(j)).sum();
    if (std::abs(s - sinks.masses()[j]) > kMarginalTol) {
      throw InvalidArgument("coupling_cost: plan violates sink marginal " + std::to_string(j));
    }
  }
  return plan_cost(plan.flows(), transport_cost_matrix(sources, sinks, q));
}

double w2_squared(const EmpiricalMeasure& samples, const DiscreteMeasure& nu,
                  const std::optional<QuadraticForm>& q) {
  return solve_transport(samples, nu, q).cost;
}

}  // namespace mospa
