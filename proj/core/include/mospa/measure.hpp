#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>

#include "mospa/error.hpp"
#include "mospa/quadratic_form.hpp"
#include "mospa/stacked_state.hpp"

namespace mospa {

struct GaussianComponent {
  double weight;
  Vector mean;
  Matrix covariance;
};

/// Joint posterior over R^{N*n_x} as a finite Gaussian mixture.
///
/// Construction validates everything: weights in (0, 1] summing to 1 within
/// 1e-12, matching dimensions, symmetric covariances whose Cholesky pivots
/// satisfy min(L_kk^2) >= 1e-12 * max(L_kk^2). Failures throw
/// InvalidArgument or FactorizationError naming the component index.
class GaussianMixtureMeasure {
 public:
  GaussianMixtureMeasure(std::size_t n_targets, std::size_t state_dim,
                         std::vector<GaussianComponent> components);

  std::size_t n_targets() const { return n_targets_; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t dim() const { return n_targets_ * state_dim_; }
  std::span<const GaussianComponent> components() const { return components_; }

  /// Lower Cholesky factor of component k's covariance.
  const Matrix& cholesky_factor(std::size_t k) const { return factors_[k]; }

  /// Writes draw `index` of stream `seed` into `out` (length dim()).
  void draw(std::uint64_t seed, std::uint64_t index, Eigen::Ref<Vector> out) const;

  /// Component that draw `index` of stream `seed` comes from.
  std::size_t draw_component(std::uint64_t seed, std::uint64_t index) const;

 private:
  std::size_t n_targets_;
  std::size_t state_dim_;
  std::vector<GaussianComponent> components_;
  std::vector<Matrix> factors_;
  std::vector<double> log_norm_;  // -0.5 * (d log 2 pi + log det C_k)
  std::vector<double> cumulative_;

  friend double gm_log_pdf(const GaussianMixtureMeasure&, const StackedState&);
};

/// Weighted point cloud in R^{N*n_x}. Points are stored as the columns of a
/// dim x m matrix.
class EmpiricalMeasure {
 public:
  /// Throws InvalidArgument on empty input, non-positive weights, weights not
  /// summing to 1 within 1e-12, non-finite points, or size mismatches.
  EmpiricalMeasure(std::size_t n_targets, std::size_t state_dim, Matrix points,
                   std::vector<double> weights);

  /// Equal weights 1/m.
  static EmpiricalMeasure uniform(std::size_t n_targets, std::size_t state_dim, Matrix points);
  static EmpiricalMeasure uniform(std::span<const StackedState> points);

  std::size_t n_targets() const { return n_targets_; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t dim() const { return n_targets_ * state_dim_; }
  std::size_t size() const { return weights_.size(); }

  auto column(std::size_t i) const { return points_.col(static_cast<Eigen::Index>(i)); }
  StackedState point(std::size_t i) const;
  const Matrix& points() const { return points_; }
  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }

  /// sqrt(sum w^2); equals 1/sqrt(m) for uniform weights.
  double weight_norm() const;

 private:
  std::size_t n_targets_;
  std::size_t state_dim_;
  Matrix points_;
  std::vector<double> weights_;
};

/// Finitely supported measure. For the induced measure nu the atoms are the
/// N! relabelings pi(x_hat) in lexicographic permutation order, zero-mass
/// atoms included.
class DiscreteMeasure {
 public:
  /// Throws InvalidArgument on empty input, shape mismatch, negative or
  /// non-finite masses, or masses not summing to 1 within 1e-12.
  DiscreteMeasure(std::vector<StackedState> atoms, std::vector<double> masses);

  static DiscreteMeasure from_empirical(const EmpiricalMeasure& e);

  std::size_t size() const { return atoms_.size(); }
  std::size_t n_targets() const { return atoms_.front().n_targets(); }
  std::size_t state_dim() const { return atoms_.front().state_dim(); }
  const std::vector<StackedState>& atoms() const { return atoms_; }
  std::span<const double> masses() const { return masses_; }

 private:
  std::vector<StackedState> atoms_;
  std::vector<double> masses_;
};

/// m independent draws with weights 1/m. Draw i uses its own counter-based
/// stream keyed by (seed, i), so the output is bit-identical for any thread
/// count.
EmpiricalMeasure gm_sample(const GaussianMixtureMeasure& mu, std::uint64_t seed, std::size_t m);

/// Mixture density, evaluated as a log-sum-exp.
double gm_pdf(const GaussianMixtureMeasure& mu, const StackedState& x);
double gm_log_pdf(const GaussianMixtureMeasure& mu, const StackedState& x);

struct RegionMasses {
  std::vector<double> masses;  ///< N! entries in lexicographic permutation order
  EstimateStatus status = EstimateStatus::kOk;
};

/// Weight of the samples falling in each permutation region of x_hat.
/// Accumulated left to right in canonical order, the masses sum to exactly 1.
RegionMasses estimate_region_masses(const EmpiricalMeasure& samples, const StackedState& x_hat,
                                    const std::optional<QuadraticForm>& q = std::nullopt);

/// Induced discrete measure: mass[k] on atom pi_k(x_hat). Masses must be
/// nonnegative, N! long and sum to 1 within 1e-9 (they are renormalised);
/// x_hat must have distinct blocks.
DiscreteMeasure build_nu(const StackedState& x_hat, std::span<const double> masses);

}  // namespace mospa
