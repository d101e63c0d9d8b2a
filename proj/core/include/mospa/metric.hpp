#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mospa/assignment.hpp"
#include "mospa/error.hpp"
#include "mospa/permutation.hpp"
#include "mospa/quadratic_form.hpp"
#include "mospa/stacked_state.hpp"

namespace mospa {

/// Squared OSPA distance: min over pi of |x - pi(x_hat)|^2. No root, no 1/N
/// normalisation, no cutoff.
double ospa(const StackedState& x, const StackedState& x_hat);

/// min over pi of (x - pi(x_hat))^T Q (x - pi(x_hat)).
double gospa(const StackedState& x, const StackedState& x_hat, const QuadraticForm& q);
double gospa(const StackedState& x, const StackedState& x_hat, const Matrix& q);

/// The permutation region S_pi that contains x.
struct RegionLabel {
  Permutation permutation;
  std::size_t index;  ///< lexicographic rank of `permutation`
  EstimateStatus status = EstimateStatus::kOk;
};

/// Region of x relative to x_hat; boundary ties go to the lexicographically
/// smallest permutation. Duplicate estimate blocks are reported through
/// `status` rather than thrown.
RegionLabel region_index(const StackedState& x, const StackedState& x_hat,
                         const std::optional<QuadraticForm>& q = std::nullopt);

/// Aligns raw stacked points against a fixed estimate without allocating.
/// One instance per thread.
class Aligner {
 public:
  explicit Aligner(const StackedState& x_hat, std::optional<QuadraticForm> q = std::nullopt);

  /// Re-targets the aligner at a new estimate of the same shape.
  void reset_estimate(const Vector& x_hat_data);

  /// Optimal mapping of point x (block i -> estimate block mapping[i]);
  /// returns the (Q-weighted) OSPA value.
  double align(const Eigen::Ref<const Vector>& x, std::span<std::size_t> mapping);

  /// Lexicographic rank of a mapping of size n_targets().
  std::size_t rank(std::span<const std::size_t> mapping) const;

  std::size_t n_targets() const { return n_; }
  std::size_t state_dim() const { return nx_; }

 private:
  std::size_t n_;
  std::size_t nx_;
  Vector x_hat_;
  std::optional<QuadraticForm> q_;
  std::vector<double> cost_;
  std::vector<std::size_t> factorials_;
  AssignmentSolver solver_;
};

}  // namespace mospa
