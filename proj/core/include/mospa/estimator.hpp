#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mospa/measure.hpp"
#include "mospa/quadratic_form.hpp"
#include "mospa/stacked_state.hpp"

namespace mospa {

struct MospaEstimate {
  double value = 0.0;
  double std_error = 0.0;  ///< unbiased sample std of per-sample OSPA times sqrt(sum w^2)
  std::size_t sample_count = 0;
};

/// Monte Carlo MOSPA: sum_m w_m d_OSPA(x_m, x_hat), or d_GOSPA with q.
MospaEstimate mospa_mc(const EmpiricalMeasure& samples, const StackedState& x_hat,
                       const std::optional<QuadraticForm>& q = std::nullopt);

/// Labelled counterpart sum_m w_m (x_m - x_hat)^T Q (x_m - x_hat).
double empirical_mse(const EmpiricalMeasure& samples, const StackedState& x_hat,
                     const std::optional<QuadraticForm>& q = std::nullopt);

struct MmospaConfig {
  std::size_t max_iters = 100;
  double tol = 1e-10;          ///< stop when the objective drops by less than this
  std::size_t restarts = 16;
  double restart_scale = 1.0;  ///< init jitter in units of per-coordinate sample std
  std::uint64_t seed = 0;
};

struct MmospaResult {
  StackedState estimate;  ///< blocks sorted lexicographically
  double empirical_mospa;
  std::size_t iterations;
  std::size_t restarts_used;
  bool converged;
  std::vector<double> descent_trace;  ///< objective after every iteration
};

/// Minimises the empirical MOSPA by alternating (A) optimal alignment of
/// every sample to the current estimate and (B) replacing each estimate
/// block with the weighted mean of the sample blocks aligned to it (the
/// B_t-weighted mean when q has distinct per-target blocks). Both
/// steps never increase the objective. Stops when the alignment is a fixed
/// point, the decrease falls below tol, or max_iters is hit. The best of
/// `restarts` jittered starts wins.
///
/// Throws InvalidArgument for an init of the wrong shape, NumericalError if
/// the objective becomes non-finite.
MmospaResult mmospa_estimate(const EmpiricalMeasure& samples,
                             const std::optional<StackedState>& init = std::nullopt,
                             const MmospaConfig& config = {},
                             const std::optional<QuadraticForm>& q = std::nullopt);

/// Scalar-state reference: per-rank weighted means of the sorted samples
/// (expected order statistics). Throws InvalidArgument unless n_x == 1.
StackedState scalar_sort_oracle(const EmpiricalMeasure& samples);

}  // namespace mospa
