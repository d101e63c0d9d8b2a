#pragma once

#include <cstddef>
#include <initializer_list>

#include <Eigen/Core>

#include "mospa/permutation.hpp"

namespace mospa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// N target states of dimension n_x stacked into one vector of R^{N*n_x}.
/// Target i occupies [i*n_x, (i+1)*n_x).
class StackedState {
 public:
  /// Throws InvalidArgument on zero sizes, length mismatch or non-finite data.
  StackedState(std::size_t n_targets, std::size_t state_dim, Vector data);
  StackedState(std::size_t n_targets, std::size_t state_dim, std::initializer_list<double> data);

  std::size_t n_targets() const { return n_targets_; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t dim() const { return n_targets_ * state_dim_; }

  const Vector& data() const { return data_; }

  auto block(std::size_t i) const {
    return data_.segment(static_cast<Eigen::Index>(i * state_dim_),
                         static_cast<Eigen::Index>(state_dim_));
  }

  /// True when two target blocks coincide exactly.
  bool has_duplicate_blocks() const;

  /// Same state with target blocks sorted lexicographically by coordinates.
  StackedState canonicalized() const;

  bool same_shape(const StackedState& other) const {
    return n_targets_ == other.n_targets_ && state_dim_ == other.state_dim_;
  }

  friend bool operator==(const StackedState& a, const StackedState& b) {
    return a.same_shape(b) && a.data_ == b.data_;
  }

 private:
  std::size_t n_targets_;
  std::size_t state_dim_;
  Vector data_;
};

/// Block i of the result is block pi(i) of x. Throws InvalidArgument when
/// pi.size() != x.n_targets().
StackedState permutation_apply(const Permutation& pi, const StackedState& x);

}  // namespace mospa
