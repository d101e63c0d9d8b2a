#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mospa/error.hpp"
#include "mospa/quadratic_form.hpp"
#include "mospa/scenario.hpp"
#include "mospa/stacked_state.hpp"

namespace mospa {

enum class VerifyMode { kSameSample, kIndependent };

const char* to_string(VerifyMode mode);

/// Outcome of comparing the Monte Carlo MOSPA with W_2^2(mu, nu).
struct TheoremOneReport {
  double mospa_value = 0.0;
  double w2_squared = 0.0;
  double abs_diff = 0.0;
  double rel_diff = 0.0;
  VerifyMode mode = VerifyMode::kSameSample;
  double tolerance = 0.0;
  bool passed = false;

  std::size_t sample_count = 0;
  double mospa_std_error = 0.0;
  double w2_std_error = 0.0;
  std::vector<double> masses;     ///< region masses behind nu, canonical order
  std::size_t support_size = 0;   ///< atoms of nu with positive mass
  std::size_t pivots = 0;
  EstimateStatus status = EstimateStatus::kOk;
};

/// Same-sample mode draws one sample set from the scenario mixture and
/// evaluates mospa_mc, the region masses, nu and w2_squared on it; it passes
/// when |mospa - w2| <= 1e-8 * max(|mospa|, |w2|).
///
/// Independent mode draws two disjoint sets (streams seed and
/// derive_seed(seed, 1)). The first gives the masses, nu and the transport
/// cost, the second the MOSPA average; it passes at 4 combined standard errors.
///
/// Throws CapacityError past the enumeration cap, InvalidArgument for an
/// x_hat of the wrong shape or with repeated blocks.
TheoremOneReport verify_theorem1(const Scenario& scenario, const StackedState& x_hat,
                                 VerifyMode mode, std::size_t m,
                                 const std::optional<QuadraticForm>& q = std::nullopt);

}  // namespace mospa
