#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mospa/measure.hpp"
#include "mospa/quadratic_form.hpp"
#include "mospa/stacked_state.hpp"

namespace mospa {

/// Sites P and additive weights Omega of a power diagram.
class WeightedSites {
 public:
  /// Throws InvalidArgument on empty input, length or dimension mismatch,
  /// non-finite values or coincident centroids.
  WeightedSites(std::vector<Vector> centroids, std::vector<double> weights);

  /// All relabelings pi(x_hat) in lexicographic permutation order, with
  /// zero weights unless given.
  static WeightedSites from_estimate(const StackedState& x_hat,
                                     std::optional<std::vector<double>> weights = std::nullopt);

  std::size_t size() const { return centroids_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(centroids_.front().size()); }
  const std::vector<Vector>& centroids() const { return centroids_; }
  std::span<const double> weights() const { return weights_; }

 private:
  std::vector<Vector> centroids_;
  std::vector<double> weights_;
};

/// Points x with normal . x == offset.
struct Hyperplane {
  Vector normal;
  double offset;
};

/// argmin_i (x - p_i)^T Q (x - p_i) + w_i; ties go to the smallest index.
/// Q is any symmetric positive-definite matrix (identity when absent).
std::size_t power_cell_index(const Vector& x, const WeightedSites& sites,
                             const std::optional<Matrix>& q = std::nullopt);

/// Equal weighted distance locus of two sites: normal 2Q(p_j - p_i), offset
/// p_j^T Q p_j - p_i^T Q p_i + w_j - w_i. Throws InvalidArgument when the
/// sites coincide.
Hyperplane bisector(const Vector& p_i, const Vector& p_j, double w_i, double w_j,
                    const std::optional<Matrix>& q = std::nullopt);

struct AgreementReport {
  double agreement = 1.0;        ///< agreeing / compared
  std::size_t compared = 0;
  std::size_t excluded = 0;      ///< samples within the tie band
  std::size_t disagreements = 0;
};

/// Classifies every sample by power cell (sites pi(x_hat), weights Omega,
/// zero by default) and by permutation region, and counts agreement.
/// Samples whose two best weighted distances are within
/// 1e-9 * max(1, best) of each other are excluded.
AgreementReport cells_match_regions(const StackedState& x_hat, const EmpiricalMeasure& samples,
                                    const std::optional<QuadraticForm>& q = std::nullopt,
                                    const std::optional<std::vector<double>>& weights = std::nullopt);

/// Same check streamed over m draws of the mixture; nothing is stored, so m
/// can be far larger than memory allows for an EmpiricalMeasure.
AgreementReport cells_match_regions(const StackedState& x_hat, const GaussianMixtureMeasure& mu,
                                    std::uint64_t seed, std::uint64_t m,
                                    const std::optional<QuadraticForm>& q = std::nullopt,
                                    const std::optional<std::vector<double>>& weights = std::nullopt);

struct BoundingBox {
  Eigen::Vector2d lo;
  Eigen::Vector2d hi;

  static BoundingBox square(double lo, double hi) {
    return BoundingBox{Eigen::Vector2d(lo, lo), Eigen::Vector2d(hi, hi)};
  }
};

struct Segment {
  std::size_t i;
  std::size_t j;
  Eigen::Vector2d a;
  Eigen::Vector2d b;
};

/// Boundary pieces of a planar power diagram inside bbox, one per site pair
/// that shares an edge. Throws UnsupportedDimension unless the sites are 2-D.
std::vector<Segment> export_diagram_2d(const WeightedSites& sites,
                                       const std::optional<Matrix>& q, const BoundingBox& bbox);

}  // namespace mospa
