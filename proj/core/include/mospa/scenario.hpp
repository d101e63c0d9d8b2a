#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "mospa/measure.hpp"
#include "mospa/quadratic_form.hpp"

namespace mospa {

/// Everything one run needs: the joint posterior, an optional GOSPA form and
/// the Monte Carlo settings.
struct Scenario {
  std::size_t n_targets;
  std::size_t state_dim;
  GaussianMixtureMeasure mixture;
  std::optional<QuadraticForm> q;
  std::uint64_t seed = 0;
  std::size_t sample_count = 1000;

  std::size_t dim() const { return n_targets * state_dim; }
};

}  // namespace mospa
