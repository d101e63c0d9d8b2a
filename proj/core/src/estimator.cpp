#include "mospa/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>

#include "mospa/error.hpp"
#include "mospa/metric.hpp"
#include "mospa/parallel.hpp"
#include "mospa/random.hpp"

namespace mospa {
namespace {

void check_shape(const EmpiricalMeasure& samples, const StackedState& x_hat) {
  if (samples.n_targets() != x_hat.n_targets() || samples.state_dim() != x_hat.state_dim()) {
    throw InvalidArgument("samples are " + std::to_string(samples.n_targets()) + "x" +
                          std::to_string(samples.state_dim()) + " but the estimate is " +
                          std::to_string(x_hat.n_targets()) + "x" +
                          std::to_string(x_hat.state_dim()));
  }
}

std::vector<double> per_sample_ospa(const EmpiricalMeasure& samples, const StackedState& x_hat,
                                    const std::optional<QuadraticForm>& q) {
  const Aligner prototype(x_hat, q);
  std::vector<double> d(samples.size());
  parallel::for_each_chunk(samples.size(), [&](std::size_t, std::size_t b, std::size_t e) {
    Aligner aligner = prototype;
    std::vector<std::size_t> mapping(x_hat.n_targets());
    for (std::size_t i = b; i < e; ++i) d[i] = aligner.align(samples.column(i), mapping);
  });
  return d;
}

// Weighted sum of sample columns, combined chunk by chunk in a fixed order.
Vector weighted_column_sum(const EmpiricalMeasure& samples) {
  const auto dim = static_cast<Eigen::Index>(samples.dim());
  std::vector<Vector> partial(parallel::chunk_count(samples.size()));
  parallel::for_each_chunk(samples.size(), [&](std::size_t c, std::size_t b, std::size_t e) {
    Vector s = Vector::Zero(dim);
    for (std::size_t i = b; i < e; ++i) s += samples.weight(i) * samples.column(i);
    partial[c] = std::move(s);
  });
  Vector total = Vector::Zero(dim);
  for (const auto& p : partial) total += p;
  return total;
}

double total_weight(const EmpiricalMeasure& samples) {
  return parallel::deterministic_sum(samples.size(), [&](std::size_t i) { return samples.weight(i); });
}

struct AlignmentPass {
  double objective = 0.0;
  Vector block_sums;  // block j accumulates the sample blocks aligned to estimate block j
  Matrix block_weights;  // n_x x (N n_x): sum of B_t over the blocks sent to j (mixed Q only)
};

class LloydRunner {
 public:
  LloydRunner(const EmpiricalMeasure& samples, const std::optional<QuadraticForm>& q)
      : samples_(samples),
        q_(q),
        n_(samples.n_targets()),
        nx_(samples.state_dim()),
        current_(samples.size() * n_),
        previous_(samples.size() * n_),
        weight_(total_weight(samples)),
        mixed_(q && !q->uniform_blocks()) {}

  struct Run {
    Vector estimate;
    double objective;
    std::size_t iterations;
    bool converged;
    std::vector<double> trace;
  };

  Run run(Vector start, const MmospaConfig& config) {
    AlignmentPass pass = align_all(start, previous_);
    double objective = pass.objective;
    Run out{std::move(start), objective, 0, false, {}};
    for (std::size_t it = 1; it <= config.max_iters; ++it) {
      Vector next = update(pass);
      pass = align_all(next, current_);
      if (!std::isfinite(pass.objective)) {
        throw NumericalError("mmospa_estimate: objective became non-finite");
      }
      out.estimate = std::move(next);
      out.trace.push_back(pass.objective);
      out.iterations = it;
      out.objective = pass.objective;
      const bool fixed_point = current_ == previous_;
      const bool stalled = objective - pass.objective < config.tol;
      if (fixed_point || stalled) {
        out.converged = true;
        break;
      }
      objective = pass.objective;
      std::swap(current_, previous_);
    }
    return out;
  }

 private:
  // Step B. With one shared block the minimiser is the plain block mean;
  // otherwise block j solves (sum w B_t) y = sum w B_t x_t.
  Vector update(const AlignmentPass& pass) const {
    if (!mixed_) return pass.block_sums / weight_;
    const auto nx = static_cast<Eigen::Index>(nx_);
    Vector next(pass.block_sums.size());
    for (std::size_t j = 0; j < n_; ++j) {
      const auto at = static_cast<Eigen::Index>(j) * nx;
      const Matrix h = pass.block_weights.middleCols(at, nx);
      next.segment(at, nx) = h.llt().solve(pass.block_sums.segment(at, nx));
    }
    return next;
  }

  AlignmentPass align_all(const Vector& estimate, std::vector<std::uint32_t>& assignment) {
    const auto dim = static_cast<Eigen::Index>(n_ * nx_);
    const auto nx = static_cast<Eigen::Index>(nx_);
    const StackedState x_hat(n_, nx_, estimate);
    const Aligner prototype(x_hat, q_);
    const std::size_t chunks = parallel::chunk_count(samples_.size());
    std::vector<double> partial_obj(chunks, 0.0);
    std::vector<Vector> partial_sums(chunks);
    std::vector<Matrix> partial_weights(mixed_ ? chunks : 0);
    parallel::for_each_chunk(samples_.size(), [&](std::size_t c, std::size_t b, std::size_t e) {
      Aligner aligner = prototype;
      std::vector<std::size_t> mapping(n_);
      Vector sums = Vector::Zero(dim);
      Matrix weights;
      if (mixed_) weights = Matrix::Zero(nx, dim);
      double obj = 0.0;
      for (std::size_t i = b; i < e; ++i) {
        const auto x = samples_.column(i);
        const double w = samples_.weight(i);
        obj += w * aligner.align(x, mapping);
        for (std::size_t t = 0; t < n_; ++t) {
          const auto at = static_cast<Eigen::Index>(mapping[t]) * nx;
          const auto xt = x.segment(static_cast<Eigen::Index>(t) * nx, nx);
          if (mixed_) {
            sums.segment(at, nx) += w * (q_->block(t) * xt);
            weights.middleCols(at, nx) += w * q_->block(t);
          } else {
            sums.segment(at, nx) += w * xt;
          }
          assignment[i * n_ + t] = static_cast<std::uint32_t>(mapping[t]);
        }
      }
      partial_obj[c] = obj;
      partial_sums[c] = std::move(sums);
      if (mixed_) partial_weights[c] = std::move(weights);
    });
    AlignmentPass out{0.0, Vector::Zero(dim), {}};
    if (mixed_) out.block_weights = Matrix::Zero(nx, dim);
    for (std::size_t c = 0; c < chunks; ++c) {
      out.objective += partial_obj[c];
      out.block_sums += partial_sums[c];
      if (mixed_) out.block_weights += partial_weights[c];
    }
    return out;
  }

  const EmpiricalMeasure& samples_;
  const std::optional<QuadraticForm>& q_;
  std::size_t n_;
  std::size_t nx_;
  std::vector<std::uint32_t> current_;
  std::vector<std::uint32_t> previous_;
  double weight_;
  bool mixed_;
};

}  // namespace

MospaEstimate mospa_mc(const EmpiricalMeasure& samples, const StackedState& x_hat,
                       const std::optional<QuadraticForm>& q) {
  check_shape(samples, x_hat);
  const std::vector<double> d = per_sample_ospa(samples, x_hat, q);
  MospaEstimate out;
  out.sample_count = samples.size();
  out.value = parallel::deterministic_sum(d.size(), [&](std::size_t i) {
    return samples.weight(i) * d[i];
  });
  if (samples.size() >= 2) {
    const double ss = parallel::deterministic_sum(d.size(), [&](std::size_t i) {
      const double r = d[i] - out.value;
      return r * r;
    });
    const double sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
    out.std_error = sd * samples.weight_norm();
  }
  return out;
}

double empirical_mse(const EmpiricalMeasure& samples, const StackedState& x_hat,
                     const std::optional<QuadraticForm>& q) {
  check_shape(samples, x_hat);
  return parallel::deterministic_sum(samples.size(), [&](std::size_t i) {
    const Vector diff = samples.column(i) - x_hat.data();
    return samples.weight(i) * (q ? q->stacked_form(diff) : diff.squaredNorm());
  });
}

MmospaResult mmospa_estimate(const EmpiricalMeasure& samples,
                             const std::optional<StackedState>& init, const MmospaConfig& config,
                             const std::optional<QuadraticForm>& q) {
  const std::size_t n = samples.n_targets();
  const std::size_t nx = samples.state_dim();
  if (init) check_shape(samples, *init);
  if (q && (q->n_targets() != n || q->state_dim() != nx)) {
    throw UnsupportedMetric("mmospa_estimate: quadratic form shape does not match the samples");
  }
  if (config.max_iters == 0) throw InvalidArgument("mmospa_estimate: max_iters must be positive");

  const double weight = total_weight(samples);
  const Vector mean = weighted_column_sum(samples) / weight;
  Vector spread = Vector::Zero(mean.size());
  {
    std::vector<Vector> partial(parallel::chunk_count(samples.size()));
    parallel::for_each_chunk(samples.size(), [&](std::size_t c, std::size_t b, std::size_t e) {
      Vector s = Vector::Zero(mean.size());
      for (std::size_t i = b; i < e; ++i) {
        s += samples.weight(i) * (samples.column(i) - mean).cwiseAbs2();
      }
      partial[c] = std::move(s);
    });
    for (const auto& p : partial) spread += p;
    spread = (spread / weight).cwiseSqrt();
  }

  // A single target has nothing to permute: one pass lands on the mean.
  const std::size_t restarts = (n == 1) ? 1 : std::max<std::size_t>(1, config.restarts);
  LloydRunner runner(samples, q);
  std::optional<LloydRunner::Run> best;
  for (std::size_t r = 0; r < restarts; ++r) {
    Vector start = init ? init->data() : mean;
    if (!(init && r == 0) && n > 1) {
      CounterStream rng(derive_seed(config.seed, 0x4d4d4f535041ULL), r);
      std::normal_distribution<double> normal;
      for (Eigen::Index k = 0; k < start.size(); ++k) {
        start[k] += config.restart_scale * spread[k] * normal(rng);
      }
    }
    LloydRunner::Run run = runner.run(std::move(start), config);
    if (!best || run.objective < best->objective) best = std::move(run);
  }

  StackedState estimate(n, nx, best->estimate);
  return MmospaResult{estimate.canonicalized(), best->objective,  best->iterations,
                      restarts,                 best->converged,  std::move(best->trace)};
}

StackedState scalar_sort_oracle(const EmpiricalMeasure& samples) {
  if (samples.state_dim() != 1) {
    throw InvalidArgument("scalar_sort_oracle needs scalar target states (n_x = 1), got n_x = " +
                          std::to_string(samples.state_dim()));
  }
  const std::size_t n = samples.n_targets();
  std::vector<Vector> partial(parallel::chunk_count(samples.size()));
  parallel::for_each_chunk(samples.size(), [&](std::size_t c, std::size_t b, std::size_t e) {
    Vector s = Vector::Zero(static_cast<Eigen::Index>(n));
    Vector sorted(static_cast<Eigen::Index>(n));
    for (std::size_t i = b; i < e; ++i) {
      sorted = samples.column(i);
      std::sort(sorted.begin(), sorted.end());
      s += samples.weight(i) * sorted;
    }
    partial[c] = std::move(s);
  });
  Vector total = Vector::Zero(static_cast<Eigen::Index>(n));
  for (const auto& p : partial) total += p;
  return StackedState(n, 1, total / total_weight(samples));
}

}  // namespace mospa
