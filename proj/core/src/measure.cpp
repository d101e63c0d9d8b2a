#include "mospa/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mospa/metric.hpp"
#include "mospa/parallel.hpp"
#include "mospa/random.hpp"

namespace mospa {
namespace {

constexpr double kWeightSumTol = 1e-12;
constexpr double kPivotRatio = 1e-12;

std::string component_name(std::size_t k) { return "mixture component " + std::to_string(k); }

double left_to_right_sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// Neumaier summation, used where long uniform weight vectors are validated.
double compensated_sum(std::span<const double> v) {
  double s = 0.0;
  double c = 0.0;
  for (double x : v) {
    const double t = s + x;
    c += (std::abs(s) >= std::abs(x)) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

}  // namespace

GaussianMixtureMeasure::GaussianMixtureMeasure(std::size_t n_targets, std::size_t state_dim,
                                               std::vector<GaussianComponent> components)
    : n_targets_(n_targets), state_dim_(state_dim), components_(std::move(components)) {
  if (n_targets_ == 0 || state_dim_ == 0) {
    throw InvalidArgument("mixture needs positive n_targets and state_dim");
  }
  if (components_.empty()) throw InvalidArgument("mixture has no components");
  const auto d = static_cast<Eigen::Index>(dim());

  double total = 0.0;
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const auto& c = components_[k];
    if (!(c.weight > 0.0 && c.weight <= 1.0)) {
      throw InvalidArgument(component_name(k) + ": weight must lie in (0, 1]");
    }
    total += c.weight;
    if (c.mean.size() != d) {
      throw InvalidArgument(component_name(k) + ": mean has length " +
                            std::to_string(c.mean.size()) + ", expected " + std::to_string(d));
    }
    if (c.covariance.rows() != d || c.covariance.cols() != d) {
      throw InvalidArgument(component_name(k) + ": covariance must be " + std::to_string(d) +
                            "x" + std::to_string(d));
    }
    if (!c.mean.allFinite() || !c.covariance.allFinite()) {
      throw InvalidArgument(component_name(k) + ": non-finite mean or covariance");
    }
    const double mag = c.covariance.cwiseAbs().maxCoeff();
    if ((c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * mag) {
      throw InvalidArgument(component_name(k) + ": covariance is not symmetric");
    }

    Eigen::LLT<Matrix> llt(c.covariance);
    if (llt.info() != Eigen::Success) {
      throw FactorizationError(component_name(k) + ": covariance is not positive definite");
    }
    Matrix l = llt.matrixL();
    const Vector pivots = l.diagonal().array().square();
    if (!(pivots.minCoeff() >= kPivotRatio * pivots.maxCoeff()) || !(pivots.minCoeff() > 0.0)) {
      throw FactorizationError(component_name(k) + ": covariance is numerically singular");
    }
    log_norm_.push_back(-0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) +
                                2.0 * l.diagonal().array().log().sum()));
    factors_.push_back(std::move(l));
  }
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw InvalidArgument("mixture weights sum to " + std::to_string(total) + ", expected 1");
  }
  double acc = 0.0;
  for (const auto& c : components_) {
    acc += c.weight;
    cumulative_.push_back(acc);
  }
  cumulative_.back() = 1.0;
}

void GaussianMixtureMeasure::draw(std::uint64_t seed, std::uint64_t index,
                                  Eigen::Ref<Vector> out) const {
  CounterStream rng(seed, index);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t k = std::min<std::size_t>(
      static_cast<std::size_t>(it - cumulative_.begin()), components_.size() - 1);
  std::normal_distribution<double> normal;
  thread_local Vector z;
  z.resize(out.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  out = components_[k].mean + factors_[k].triangularView<Eigen::Lower>() * z;
}

std::size_t GaussianMixtureMeasure::draw_component(std::uint64_t seed, std::uint64_t index) const {
  CounterStream rng(seed, index);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                               components_.size() - 1);
}

EmpiricalMeasure::EmpiricalMeasure(std::size_t n_targets, std::size_t state_dim, Matrix points,
                                   std::vector<double> weights)
    : n_targets_(n_targets),
      state_dim_(state_dim),
      points_(std::move(points)),
      weights_(std::move(weights)) {
  if (n_targets_ == 0 || state_dim_ == 0) {
    throw InvalidArgument("empirical measure needs positive n_targets and state_dim");
  }
  if (weights_.empty()) throw InvalidArgument("empirical measure has no points");
  if (static_cast<std::size_t>(points_.rows()) != dim() ||
      static_cast<std::size_t>(points_.cols()) != weights_.size()) {
    throw InvalidArgument("empirical measure: points are " + std::to_string(points_.rows()) +
                          "x" + std::to_string(points_.cols()) + ", expected " +
                          std::to_string(dim()) + "x" + std::to_string(weights_.size()));
  }
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("empirical measure weights must be positive and finite");
    }
  }
  const double total = compensated_sum(weights_);
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw InvalidArgument("empirical measure weights sum to " + std::to_string(total));
  }
  if (!points_.allFinite()) throw InvalidArgument("empirical measure has non-finite points");
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::size_t n_targets, std::size_t state_dim,
                                           Matrix points) {
  const auto m = static_cast<std::size_t>(points.cols());
  if (m == 0) throw InvalidArgument("empirical measure has no points");
  std::vector<double> w(m, 1.0 / static_cast<double>(m));
  return EmpiricalMeasure(n_targets, state_dim, std::move(points), std::move(w));
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::span<const StackedState> points) {
  if (points.empty()) throw InvalidArgument("empirical measure has no points");
  const auto& first = points.front();
  Matrix cols(static_cast<Eigen::Index>(first.dim()), static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].same_shape(first)) {
      throw InvalidArgument("empirical measure points have different shapes");
    }
    cols.col(static_cast<Eigen::Index>(i)) = points[i].data();
  }
  return uniform(first.n_targets(), first.state_dim(), std::move(cols));
}

StackedState EmpiricalMeasure::point(std::size_t i) const {
  return StackedState(n_targets_, state_dim_, Vector(column(i)));
}

double EmpiricalMeasure::weight_norm() const {
  double s = 0.0;
  for (double w : weights_) s += w * w;
  return std::sqrt(s);
}

DiscreteMeasure::DiscreteMeasure(std::vector<StackedState> atoms, std::vector<double> masses)
    : atoms_(std::move(atoms)), masses_(std::move(masses)) {
  if (atoms_.empty()) throw InvalidArgument("discrete measure has no atoms");
  if (atoms_.size() != masses_.size()) {
    throw InvalidArgument("discrete measure: atom and mass counts differ");
  }
  for (const auto& a : atoms_) {
    if (!a.same_shape(atoms_.front())) {
      throw InvalidArgument("discrete measure atoms have different shapes");
    }
  }
  for (double w : masses_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("discrete measure masses must be nonnegative and finite");
    }
  }
  const double total = compensated_sum(masses_);
  if (std::abs(total - 1.0) > kWeightSumTol) {
    throw InvalidArgument("discrete measure masses sum to " + std::to_string(total));
  }
}

DiscreteMeasure DiscreteMeasure::from_empirical(const EmpiricalMeasure& e) {
  std::vector<StackedState> atoms;
  atoms.reserve(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) atoms.push_back(e.point(i));
  return DiscreteMeasure(std::move(atoms), {e.weights().begin(), e.weights().end()});
}

EmpiricalMeasure gm_sample(const GaussianMixtureMeasure& mu, std::uint64_t seed, std::size_t m) {
  if (m == 0) throw InvalidArgument("gm_sample: sample count must be positive");
  Matrix points(static_cast<Eigen::Index>(mu.dim()), static_cast<Eigen::Index>(m));
  parallel::for_each_chunk(m, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) mu.draw(seed, i, points.col(static_cast<Eigen::Index>(i)));
  });
  return EmpiricalMeasure::uniform(mu.n_targets(), mu.state_dim(), std::move(points));
}

double gm_log_pdf(const GaussianMixtureMeasure& mu, const StackedState& x) {
  if (x.dim() != mu.dim()) {
    throw InvalidArgument("gm_pdf: point has dimension " + std::to_string(x.dim()) +
                          ", mixture has " + std::to_string(mu.dim()));
  }
  std::vector<double> terms;
  terms.reserve(mu.components_.size());
  for (std::size_t k = 0; k < mu.components_.size(); ++k) {
    const Vector y =
        mu.factors_[k].triangularView<Eigen::Lower>().solve(x.data() - mu.components_[k].mean);
    terms.push_back(std::log(mu.components_[k].weight) + mu.log_norm_[k] - 0.5 * y.squaredNorm());
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

double gm_pdf(const GaussianMixtureMeasure& mu, const StackedState& x) {
  return std::exp(gm_log_pdf(mu, x));
}

RegionMasses estimate_region_masses(const EmpiricalMeasure& samples, const StackedState& x_hat,
                                    const std::optional<QuadraticForm>& q) {
  if (samples.n_targets() != x_hat.n_targets() || samples.state_dim() != x_hat.state_dim()) {
    throw InvalidArgument("estimate_region_masses: samples and estimate differ in shape");
  }
  const std::size_t n = x_hat.n_targets();
  const std::size_t regions = factorial(n);
  const Aligner prototype(x_hat, q);

  const std::size_t chunks = parallel::chunk_count(samples.size());
  std::vector<std::vector<double>> partial(chunks);
  parallel::for_each_chunk(samples.size(), [&](std::size_t c, std::size_t b, std::size_t e) {
    Aligner aligner = prototype;
    std::vector<std::size_t> mapping(n);
    std::vector<double> acc(regions, 0.0);
    for (std::size_t i = b; i < e; ++i) {
      aligner.align(samples.column(i), mapping);
      acc[aligner.rank(mapping)] += samples.weight(i);
    }
    partial[c] = std::move(acc);
  });

  std::vector<double> raw(regions, 0.0);
  for (const auto& p : partial) {
    for (std::size_t k = 0; k < regions; ++k) raw[k] += p[k];
  }
  const double total = left_to_right_sum(raw);
  RegionMasses out;
  out.masses.resize(regions);
  for (std::size_t k = 0; k < regions; ++k) out.masses[k] = raw[k] / total;

  // Give the last occupied region the complement of the running sum so the
  // canonical-order accumulation is exactly 1.
  std::size_t last = regions;
  for (std::size_t k = regions; k-- > 0;) {
    if (out.masses[k] > 0.0) {
      last = k;
      break;
    }
  }
  double head = 0.0;
  for (std::size_t k = 0; k < last; ++k) head += out.masses[k];
  out.masses[last] = 1.0 - head;
  for (int guard = 0; guard < 4 && left_to_right_sum(out.masses) != 1.0; ++guard) {
    out.masses[last] += 1.0 - left_to_right_sum(out.masses);
  }

  if (x_hat.has_duplicate_blocks()) out.status = EstimateStatus::kDegenerateEstimate;
  return out;
}

DiscreteMeasure build_nu(const StackedState& x_hat, std::span<const double> masses) {
  const std::size_t regions = factorial(x_hat.n_targets());
  if (masses.size() != regions) {
    throw InvalidArgument("build_nu: expected " + std::to_string(regions) + " masses, got " +
                          std::to_string(masses.size()));
  }
  for (double w : masses) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InvalidArgument("build_nu: masses must be nonnegative and finite");
    }
  }
  const double total = compensated_sum(masses);
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("build_nu: masses sum to " + std::to_string(total) + ", expected 1");
  }
  if (x_hat.has_duplicate_blocks()) {
    throw InvalidArgument("build_nu: estimate has coincident target blocks");
  }
  std::vector<double> normalised(masses.begin(), masses.end());
  if (total != 1.0) {
    for (double& w : normalised) w /= total;
  }
  std::vector<StackedState> atoms;
  atoms.reserve(regions);
  for (const auto& pi : permutation_enumerate(x_hat.n_targets())) {
    atoms.push_back(permutation_apply(pi, x_hat));
  }
  return DiscreteMeasure(std::move(atoms), std::move(normalised));
}

}  // namespace mospa
