#include "mospa/theorem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mospa/estimator.hpp"
#include "mospa/measure.hpp"
#include "mospa/parallel.hpp"
#include "mospa/permutation.hpp"
#include "mospa/random.hpp"
#include "mospa/transport.hpp"

namespace mospa {
namespace {

struct TransportSide {
  double cost;
  double std_error;
  std::size_t pivots;
  RegionMasses masses;
  std::size_t support;
};

// W_2^2(samples, nu) together with the spread of the per-sample transport
// cost, which plays the role of the per-sample OSPA.
TransportSide transport_side(const EmpiricalMeasure& samples, const StackedState& x_hat,
                             const std::optional<QuadraticForm>& q) {
  RegionMasses masses = estimate_region_masses(samples, x_hat, q);
  const DiscreteMeasure nu = build_nu(x_hat, masses.masses);
  const Matrix cost = transport_cost_matrix(samples, nu, q);
  const TransportSolution sol = solve_transportation_problem(cost, samples.weights(), nu.masses());

  const Matrix& flows = sol.plan.flows();
  std::vector<double> per_sample(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    per_sample[i] = flows.row(r).dot(cost.row(r)) / samples.weight(i);
  }
  double se = 0.0;
  if (samples.size() >= 2) {
    const double ss = parallel::deterministic_sum(samples.size(), [&](std::size_t i) {
      const double d = per_sample[i] - sol.cost;
      return d * d;
    });
    se = std::sqrt(ss / static_cast<double>(samples.size() - 1)) * samples.weight_norm();
  }
  const auto support = static_cast<std::size_t>(
      std::count_if(masses.masses.begin(), masses.masses.end(), [](double w) { return w > 0.0; }));
  return TransportSide{sol.cost, se, sol.pivots, std::move(masses), support};
}

}  // namespace

const char* to_string(VerifyMode mode) {
  return mode == VerifyMode::kSameSample ? "same-sample" : "independent";
}

TheoremOneReport verify_theorem1(const Scenario& scenario, const StackedState& x_hat,
                                 VerifyMode mode, std::size_t m,
                                 const std::optional<QuadraticForm>& q) {
  const GaussianMixtureMeasure& mu = scenario.mixture;
  if (x_hat.n_targets() != mu.n_targets() || x_hat.state_dim() != mu.state_dim()) {
    throw InvalidArgument("verify_theorem1: x_hat is " + std::to_string(x_hat.n_targets()) + "x" +
                          std::to_string(x_hat.state_dim()) + " but the scenario is " +
                          std::to_string(mu.n_targets()) + "x" + std::to_string(mu.state_dim()));
  }
  if (m == 0) throw InvalidArgument("verify_theorem1: sample count must be positive");
  if (mu.n_targets() > kDefaultEnumerationCap) {
    throw CapacityError("verify_theorem1: N = " + std::to_string(mu.n_targets()) +
                        " exceeds the enumeration cap of " +
                        std::to_string(kDefaultEnumerationCap));
  }
  if (x_hat.has_duplicate_blocks()) {
    throw InvalidArgument("verify_theorem1: x_hat has repeated target blocks");
  }

  TheoremOneReport report;
  report.mode = mode;
  report.sample_count = m;

  const EmpiricalMeasure a = gm_sample(mu, scenario.seed, m);
  const TransportSide side = transport_side(a, x_hat, q);
  report.w2_squared = side.cost;
  report.w2_std_error = side.std_error;
  report.pivots = side.pivots;
  report.masses = side.masses.masses;
  report.status = side.masses.status;
  report.support_size = side.support;

  MospaEstimate est;
  if (mode == VerifyMode::kSameSample) {
    est = mospa_mc(a, x_hat, q);
  } else {
    const EmpiricalMeasure b = gm_sample(mu, derive_seed(scenario.seed, 1), m);
    est = mospa_mc(b, x_hat, q);
  }
  report.mospa_value = est.value;
  report.mospa_std_error = est.std_error;

  report.abs_diff = std::abs(report.mospa_value - report.w2_squared);
  const double scale = std::max(std::abs(report.mospa_value), std::abs(report.w2_squared));
  report.rel_diff = scale > 0.0 ? report.abs_diff / scale : 0.0;
  report.tolerance = mode == VerifyMode::kSameSample
                         ? 1e-8 * scale
                         : 4.0 * std::hypot(report.mospa_std_error, report.w2_std_error);
  report.passed = report.abs_diff <= report.tolerance;
  return report;
}

}  // namespace mospa
