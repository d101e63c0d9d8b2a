#include "mospa/stacked_state.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "mospa/error.hpp"

namespace mospa {

StackedState::StackedState(std::size_t n_targets, std::size_t state_dim, Vector data)
    : n_targets_(n_targets), state_dim_(state_dim), data_(std::move(data)) {
  if (n_targets_ == 0 || state_dim_ == 0) {
    throw InvalidArgument("stacked state needs positive n_targets and state_dim");
  }
  if (static_cast<std::size_t>(data_.size()) != n_targets_ * state_dim_) {
    throw InvalidArgument("stacked state data has length " + std::to_string(data_.size()) +
                          ", expected " + std::to_string(n_targets_ * state_dim_));
  }
  if (!data_.allFinite()) {
    throw InvalidArgument("stacked state contains non-finite entries");
  }
}

StackedState::StackedState(std::size_t n_targets, std::size_t state_dim,
                           std::initializer_list<double> data)
    : StackedState(n_targets, state_dim,
                   Eigen::Map<const Vector>(data.begin(), static_cast<Eigen::Index>(data.size()))) {}

bool StackedState::has_duplicate_blocks() const {
  for (std::size_t i = 0; i < n_targets_; ++i) {
    for (std::size_t j = i + 1; j < n_targets_; ++j) {
      if (block(i) == block(j)) return true;
    }
  }
  return false;
}

StackedState StackedState::canonicalized() const {
  std::vector<std::size_t> order(n_targets_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ba = block(a);
    const auto bb = block(b);
    return std::lexicographical_compare(ba.begin(), ba.end(), bb.begin(), bb.end());
  });
  return permutation_apply(Permutation(std::move(order)), *this);
}

StackedState permutation_apply(const Permutation& pi, const StackedState& x) {
  if (pi.size() != x.n_targets()) {
    throw InvalidArgument("permutation of size " + std::to_string(pi.size()) +
                          " applied to a state with " + std::to_string(x.n_targets()) +
                          " targets");
  }
  const auto nx = static_cast<Eigen::Index>(x.state_dim());
  Vector out(x.data().size());
  for (std::size_t i = 0; i < pi.size(); ++i) {
    out.segment(static_cast<Eigen::Index>(i) * nx, nx) = x.block(pi[i]);
  }
  return StackedState(x.n_targets(), x.state_dim(), std::move(out));
}

}  // namespace mospa
