#include "mospa/quadratic_form.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "mospa/error.hpp"

namespace mospa {

QuadraticForm QuadraticForm::identity(std::size_t n_targets, std::size_t state_dim) {
  if (n_targets == 0 || state_dim == 0) {
    throw InvalidArgument("quadratic form needs positive n_targets and state_dim");
  }
  const auto nx = static_cast<Eigen::Index>(state_dim);
  return QuadraticForm(n_targets, state_dim, 1.0, {Matrix::Identity(nx, nx)}, true);
}

QuadraticForm QuadraticForm::from_matrix(const Matrix& q, std::size_t n_targets,
                                         std::size_t state_dim) {
  if (n_targets == 0 || state_dim == 0) {
    throw InvalidArgument("quadratic form needs positive n_targets and state_dim");
  }
  const auto dim = static_cast<Eigen::Index>(n_targets * state_dim);
  if (q.rows() != dim || q.cols() != dim) {
    throw InvalidArgument("q_matrix must be " + std::to_string(dim) + "x" + std::to_string(dim) +
                          ", got " + std::to_string(q.rows()) + "x" + std::to_string(q.cols()));
  }
  if (!q.allFinite()) throw InvalidArgument("q_matrix has non-finite entries");
  const double mag = q.cwiseAbs().maxCoeff();
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * mag) {
    throw InvalidArgument("q_matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0)) {
    throw InvalidArgument("q_matrix is not positive definite");
  }

  const auto nx = static_cast<Eigen::Index>(state_dim);
  std::vector<Matrix> blocks;
  for (std::size_t i = 0; i < n_targets; ++i) {
    for (std::size_t j = 0; j < n_targets; ++j) {
      const auto bi = static_cast<Eigen::Index>(i) * nx;
      const auto bj = static_cast<Eigen::Index>(j) * nx;
      if (i != j && !q.block(bi, bj, nx, nx).isZero(0.0)) {
        throw UnsupportedMetric("q_matrix couples targets " + std::to_string(i) + " and " +
                                std::to_string(j) +
                                "; only block-diagonal Q (one block per target) is supported");
      }
    }
    blocks.push_back(q.block(static_cast<Eigen::Index>(i) * nx, static_cast<Eigen::Index>(i) * nx,
                             nx, nx));
  }

  const double c = blocks.front()(0, 0);
  const Matrix iso = c * Matrix::Identity(nx, nx);
  bool isotropic = true;
  for (const auto& b : blocks) isotropic = isotropic && b == iso;
  if (isotropic) {
    return QuadraticForm(n_targets, state_dim, c, {Matrix::Identity(nx, nx)}, true);
  }
  return QuadraticForm(n_targets, state_dim, 1.0, std::move(blocks), false);
}

QuadraticForm QuadraticForm::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw InvalidArgument("quadratic form scale must be positive and finite");
  }
  QuadraticForm out = *this;
  out.factors_.push_back(c);
  return out;
}

double QuadraticForm::scale() const { return apply_scale(1.0); }

bool QuadraticForm::uniform_blocks() const {
  if (isotropic_) return true;
  for (const auto& b : blocks_) {
    if (b != blocks_.front()) return false;
  }
  return true;
}

double QuadraticForm::stacked_form(const Vector& diff) const {
  const auto nx = static_cast<Eigen::Index>(state_dim_);
  double s = 0.0;
  for (std::size_t i = 0; i < n_targets_; ++i) {
    s += shape_form(i, diff.segment(static_cast<Eigen::Index>(i) * nx, nx));
  }
  return apply_scale(s);
}

Matrix QuadraticForm::full_matrix() const {
  const auto nx = static_cast<Eigen::Index>(state_dim_);
  const auto dim = static_cast<Eigen::Index>(n_targets_) * nx;
  Matrix q = Matrix::Zero(dim, dim);
  for (std::size_t i = 0; i < n_targets_; ++i) {
    const auto b = static_cast<Eigen::Index>(i) * nx;
    q.block(b, b, nx, nx) = scale() * block(i);
  }
  return q;
}

}  // namespace mospa
