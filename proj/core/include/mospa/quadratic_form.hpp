#pragma once

#include <cstddef>
#include <vector>

#include "mospa/stacked_state.hpp"

namespace mospa {

/// Positive-definite weighting Q of the stacked squared distance
/// (x - y)^T Q (x - y).
///
/// Only block-diagonal Q are representable: blockdiag(B_0, ..., B_{N-1})
/// with one SPD n_x x n_x block per target and zero coupling blocks. Then
/// (x - pi(y))^T Q (x - pi(y)) = sum_i (x_i - y_pi(i))^T B_i (x_i - y_pi(i)),
/// which an assignment over per-target costs can minimise.
///
/// When every block equals c I the form is stored as scale c times the
/// identity. Unscaled block sums are computed first and the scale factors
/// applied last, one multiplication per factor, so scaled(c) multiplies every
/// value by exactly c and never moves an argmin.
class QuadraticForm {
 public:
  /// Euclidean form, Q = I.
  static QuadraticForm identity(std::size_t n_targets, std::size_t state_dim);

  /// Validates a full (N*n_x) x (N*n_x) matrix. Throws InvalidArgument when
  /// the size is wrong, the matrix is not symmetric or not positive definite;
  /// UnsupportedMetric when it couples different targets.
  static QuadraticForm from_matrix(const Matrix& q, std::size_t n_targets,
                                   std::size_t state_dim);

  /// Q scaled by c > 0.
  QuadraticForm scaled(double c) const;

  std::size_t n_targets() const { return n_targets_; }
  std::size_t state_dim() const { return state_dim_; }
  /// Product of all scale factors.
  double scale() const;
  bool isotropic() const { return isotropic_; }
  /// True when all targets share one block, so block means minimise it.
  bool uniform_blocks() const;
  /// Unscaled block of target i.
  const Matrix& block(std::size_t i) const { return blocks_[isotropic_ ? 0 : i]; }

  /// d^T B_i d for the difference d of target block i (no scale applied).
  template <typename Derived>
  double shape_form(std::size_t i, const Eigen::MatrixBase<Derived>& d) const {
    if (isotropic_) return d.squaredNorm();
    return d.dot(blocks_[i] * d);
  }

  /// Applies the scale factors, in order, to an unscaled block sum.
  double apply_scale(double unscaled) const {
    double v = unscaled * scale_;
    for (double f : factors_) v *= f;
    return v;
  }

  /// Full stacked value (x - y)^T Q (x - y) for diff = x - y.
  double stacked_form(const Vector& diff) const;

  /// Dense (N*n_x)^2 matrix.
  Matrix full_matrix() const;

 private:
  QuadraticForm(std::size_t n_targets, std::size_t state_dim, double scale,
                std::vector<Matrix> blocks, bool isotropic)
      : n_targets_(n_targets),
        state_dim_(state_dim),
        scale_(scale),
        blocks_(std::move(blocks)),
        isotropic_(isotropic) {}

  std::size_t n_targets_;
  std::size_t state_dim_;
  double scale_;
  std::vector<double> factors_;
  std::vector<Matrix> blocks_;  // a single identity block when isotropic
  bool isotropic_;
};

}  // namespace mospa
