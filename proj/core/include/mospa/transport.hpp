#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mospa/measure.hpp"
#include "mospa/quadratic_form.hpp"

namespace mospa {

/// Nonnegative coupling between a source and a sink weight vector.
class TransportPlan {
 public:
  /// Throws InvalidArgument naming the first violated marginal when row or
  /// column sums are off by more than 1e-9, or when a flow is negative.
  TransportPlan(Matrix flows, std::vector<double> source_marginal,
                std::vector<double> sink_marginal);

  std::size_t n_sources() const { return source_marginal_.size(); }
  std::size_t n_sinks() const { return sink_marginal_.size(); }
  const Matrix& flows() const { return flows_; }
  std::span<const double> source_marginal() const { return source_marginal_; }
  std::span<const double> sink_marginal() const { return sink_marginal_; }

 private:
  Matrix flows_;
  std::vector<double> source_marginal_;
  std::vector<double> sink_marginal_;
};

struct TransportSolution {
  TransportPlan plan;
  double cost;
  std::size_t pivots = 0;
};

/// Exact Hitchcock-Koopmans solver on a dense cost matrix (rows = sources).
///
/// Transportation simplex on the bipartite spanning-tree basis with block
/// pricing. Degenerate pivots are avoided by perturbing the marginals
/// (supply_i + eps, last demand + m eps); the final basis is then re-solved
/// against the unperturbed marginals, so the reported plan and cost carry no
/// perturbation. Zero-mass rows and columns are removed before solving and
/// come back as zero rows/columns.
///
/// Throws InvalidArgument on size mismatch, negative/non-finite data,
/// all-zero marginals, or totals differing by more than 1e-9.
TransportSolution solve_transportation_problem(const Matrix& cost, std::span<const double> supply,
                                               std::span<const double> demand);

/// Squared (Q-weighted) Euclidean distances between every source and sink.
Matrix transport_cost_matrix(const EmpiricalMeasure& sources, const DiscreteMeasure& sinks,
                             const std::optional<QuadraticForm>& q = std::nullopt);

/// sum_ij flows_ij * cost_ij, accumulated row by row.
double plan_cost(const Matrix& flows, const Matrix& cost);

TransportSolution solve_transport(const EmpiricalMeasure& sources, const DiscreteMeasure& sinks,
                                  const std::optional<QuadraticForm>& q = std::nullopt);

/// Cost of one feasible coupling. Throws InvalidArgument when the plan's
/// marginals do not match the two measures.
double coupling_cost(const TransportPlan& plan, const EmpiricalMeasure& sources,
                     const DiscreteMeasure& sinks,
                     const std::optional<QuadraticForm>& q = std::nullopt);

/// Optimal transport cost W_2^2 (no square root).
double w2_squared(const EmpiricalMeasure& samples, const DiscreteMeasure& nu,
                  const std::optional<QuadraticForm>& q = std::nullopt);

}  // namespace mospa
