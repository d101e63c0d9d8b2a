#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mospa/permutation.hpp"
#include "mospa/quadratic_form.hpp"
#include "mospa/stacked_state.hpp"

namespace mospa {

/// Square matrix with finite, nonnegative entries.
class CostMatrix {
 public:
  /// Throws InvalidArgument when `entries` is empty, non-square, non-finite
  /// or has a negative entry.
  explicit CostMatrix(Matrix entries);

  std::size_t n() const { return static_cast<std::size_t>(entries_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Matrix& entries() const { return entries_; }

 private:
  Matrix entries_;
};

struct AssignmentResult {
  Permutation permutation;  ///< row i is matched to column permutation[i]
  double total_cost;        ///< sum_i c(i, permutation[i]), summed in row order
};

/// Allocation-free O(n^3) primal-dual (Hungarian) assignment kernel.
///
/// Among optimal assignments whose row-order cost sums tie, the
/// lexicographically smallest mapping is returned. Reuse one instance per
/// thread in hot loops; instances are not shareable across threads.
class AssignmentSolver {
 public:
  /// `cost` is row-major n x n. Writes the mapping into `out` (size n) and
  /// returns the row-order total. No validation is done here.
  double solve(std::span<const double> cost, std::size_t n, std::span<std::size_t> out);

 private:
  double solve_general(std::span<const double> cost, std::size_t n, std::span<std::size_t> out);
  bool lexicographic_refine(std::span<const double> cost, std::size_t n);
  bool augment_tight(std::size_t row, std::size_t target_col, std::size_t first_free_row,
                     std::size_t banned_col);

  std::vector<double> u_, v_, minv_;
  std::vector<std::size_t> p_, way_;
  std::vector<char> used_;
  std::vector<std::size_t> row_to_col_, col_to_row_;
  std::vector<char> tight_, locked_, visited_;
  std::size_t n_ = 0;
};

/// Exact minimum-cost perfect matching.
AssignmentResult solve_assignment(const CostMatrix& c);

/// Exhaustive minimum over all n! permutations (strictly-smaller update in
/// lexicographic order). Throws CapacityError when n > cap.
AssignmentResult brute_force_assignment(const CostMatrix& c,
                                        std::size_t cap = kDefaultEnumerationCap);

/// Matches target blocks of x to estimate blocks of x_hat under the
/// (Q-weighted) squared distance. The cost is d_OSPA(x, x_hat), or d_GOSPA
/// when q is given.
AssignmentResult optimal_permutation(const StackedState& x, const StackedState& x_hat,
                                     const std::optional<QuadraticForm>& q = std::nullopt);

/// Throws InvalidArgument when x and x_hat differ in shape, UnsupportedMetric
/// when q was built for another shape.
void check_compatible(const StackedState& x, const StackedState& x_hat,
                      const std::optional<QuadraticForm>& q);

}  // namespace mospa
