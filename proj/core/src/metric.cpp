#include "mospa/metric.hpp"

namespace mospa {

double ospa(const StackedState& x, const StackedState& x_hat) {
  return optimal_permutation(x, x_hat).total_cost;
}

double gospa(const StackedState& x, const StackedState& x_hat, const QuadraticForm& q) {
  return optimal_permutation(x, x_hat, q).total_cost;
}

double gospa(const StackedState& x, const StackedState& x_hat, const Matrix& q) {
  return gospa(x, x_hat, QuadraticForm::from_matrix(q, x.n_targets(), x.state_dim()));
}

RegionLabel region_index(const StackedState& x, const StackedState& x_hat,
                         const std::optional<QuadraticForm>& q) {
  AssignmentResult r = optimal_permutation(x, x_hat, q);
  const std::size_t index = r.permutation.lexicographic_rank();
  const auto status =
      x_hat.has_duplicate_blocks() ? EstimateStatus::kDegenerateEstimate : EstimateStatus::kOk;
  return {std::move(r.permutation), index, status};
}

Aligner::Aligner(const StackedState& x_hat, std::optional<QuadraticForm> q)
    : n_(x_hat.n_targets()),
      nx_(x_hat.state_dim()),
      x_hat_(x_hat.data()),
      q_(std::move(q)),
      cost_(n_ * n_),
      factorials_(n_ + 1) {
  if (q_ && (q_->n_targets() != n_ || q_->state_dim() != nx_)) {
    throw UnsupportedMetric("quadratic form shape does not match the estimate");
  }
  for (std::size_t k = 0; k <= n_; ++k) factorials_[k] = factorial(k);
}

void Aligner::reset_estimate(const Vector& x_hat_data) {
  if (static_cast<std::size_t>(x_hat_data.size()) != n_ * nx_) {
    throw InvalidArgument("Aligner::reset_estimate: dimension mismatch");
  }
  x_hat_ = x_hat_data;
}

double Aligner::align(const Eigen::Ref<const Vector>& x, std::span<std::size_t> mapping) {
  const auto nx = static_cast<Eigen::Index>(nx_);
  for (std::size_t i = 0; i < n_; ++i) {
    const auto xi = x.segment(static_cast<Eigen::Index>(i) * nx, nx);
    for (std::size_t j = 0; j < n_; ++j) {
      const auto d = xi - x_hat_.segment(static_cast<Eigen::Index>(j) * nx, nx);
      cost_[i * n_ + j] = q_ ? q_->shape_form(i, d) : d.squaredNorm();
    }
  }
  const double total = solver_.solve(cost_, n_, mapping);
  return q_ ? q_->apply_scale(total) : total;
}

std::size_t Aligner::rank(std::span<const std::size_t> mapping) const {
  std::size_t r = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    std::size_t smaller = 0;
    for (std::size_t j = i + 1; j < n_; ++j) {
      if (mapping[j] < mapping[i]) ++smaller;
    }
    r += smaller * factorials_[n_ - 1 - i];
  }
  return r;
}

}  // namespace mospa
