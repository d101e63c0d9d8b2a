#include "mospa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "mospa/error.hpp"
#include "mospa/metric.hpp"
#include "mospa/parallel.hpp"
#include "mospa/permutation.hpp"

namespace mospa {
namespace {

void check_spd(const Matrix& q, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  if (q.rows() != d || q.cols() != d) {
    throw InvalidArgument("Q must be " + std::to_string(dim) + "x" + std::to_string(dim) +
                          ", got " + std::to_string(q.rows()) + "x" + std::to_string(q.cols()));
  }
  if (!q.allFinite()) throw InvalidArgument("Q has non-finite entries");
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("Q is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) throw InvalidArgument("Q is not positive definite");
}

double form(const Vector& d, const std::optional<Matrix>& q) {
  return q ? d.dot(*q * d) : d.squaredNorm();
}

struct Ranked {
  std::size_t best;
  double best_value;
  double second_value;
};

// Best and runner-up weighted distance over all sites.
template <typename F>
Ranked rank_sites(std::size_t count, F&& value) {
  Ranked r{0, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k < count; ++k) {
    const double v = value(k);
    if (v < r.best_value) {
      r.second_value = r.best_value;
      r.best_value = v;
      r.best = k;
    } else if (v < r.second_value) {
      r.second_value = v;
    }
  }
  return r;
}

struct Tally {
  std::size_t compared = 0;
  std::size_t excluded = 0;
  std::size_t disagreements = 0;
};

class Classifier {
 public:
  Classifier(const StackedState& x_hat, const std::optional<QuadraticForm>& q,
             const std::optional<std::vector<double>>& weights)
      : sites_(WeightedSites::from_estimate(x_hat, weights)),
        q_(q),
        aligner_(x_hat, q),
        mapping_(x_hat.n_targets()),
        diff_(static_cast<Eigen::Index>(x_hat.dim())) {
    if (q && (q->n_targets() != x_hat.n_targets() || q->state_dim() != x_hat.state_dim())) {
      throw UnsupportedMetric("cells_match_regions: quadratic form shape does not match x_hat");
    }
  }

  void classify(const Eigen::Ref<const Vector>& x, Tally& tally) {
    const Ranked r = rank_sites(sites_.size(), [&](std::size_t k) {
      diff_ = x - sites_.centroids()[k];
      return (q_ ? q_->stacked_form(diff_) : diff_.squaredNorm()) + sites_.weights()[k];
    });
    if (sites_.size() > 1 &&
        r.second_value - r.best_value <= 1e-9 * std::max(1.0, std::abs(r.best_value))) {
      ++tally.excluded;
      return;
    }
    aligner_.align(x, mapping_);
    ++tally.compared;
    if (aligner_.rank(mapping_) != r.best) ++tally.disagreements;
  }

 private:
  WeightedSites sites_;
  std::optional<QuadraticForm> q_;
  Aligner aligner_;
  std::vector<std::size_t> mapping_;
  Vector diff_;
};

AgreementReport finish(const std::vector<Tally>& partial) {
  AgreementReport out;
  for (const auto& t : partial) {
    out.compared += t.compared;
    out.excluded += t.excluded;
    out.disagreements += t.disagreements;
  }
  out.agreement = out.compared == 0 ? 1.0
                                    : static_cast<double>(out.compared - out.disagreements) /
                                          static_cast<double>(out.compared);
  return out;
}

}  // namespace

WeightedSites::WeightedSites(std::vector<Vector> centroids, std::vector<double> weights)
    : centroids_(std::move(centroids)), weights_(std::move(weights)) {
  if (centroids_.empty()) throw InvalidArgument("WeightedSites: no sites");
  if (centroids_.size() != weights_.size()) {
    throw InvalidArgument("WeightedSites: " + std::to_string(centroids_.size()) +
                          " centroids but " + std::to_string(weights_.size()) + " weights");
  }
  const Eigen::Index d = centroids_.front().size();
  if (d == 0) throw InvalidArgument("WeightedSites: zero-dimensional sites");
  for (std::size_t k = 0; k < centroids_.size(); ++k) {
    if (centroids_[k].size() != d) {
      throw InvalidArgument("WeightedSites: site " + std::to_string(k) + " has dimension " +
                            std::to_string(centroids_[k].size()) + ", expected " +
                            std::to_string(d));
    }
    if (!centroids_[k].allFinite() || !std::isfinite(weights_[k])) {
      throw InvalidArgument("WeightedSites: site " + std::to_string(k) + " is not finite");
    }
  }
  std::vector<std::size_t> order(centroids_.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(centroids_[a].begin(), centroids_[a].end(),
                                        centroids_[b].begin(), centroids_[b].end());
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (centroids_[order[k - 1]] == centroids_[order[k]]) {
      throw InvalidArgument("WeightedSites: sites " + std::to_string(order[k - 1]) + " and " +
                            std::to_string(order[k]) + " coincide");
    }
  }
}

WeightedSites WeightedSites::from_estimate(const StackedState& x_hat,
                                           std::optional<std::vector<double>> weights) {
  const std::vector<Permutation> perms = permutation_enumerate(x_hat.n_targets());
  std::vector<Vector> centroids;
  centroids.reserve(perms.size());
  for (const auto& p : perms) centroids.push_back(permutation_apply(p, x_hat).data());
  if (!weights) weights.emplace(perms.size(), 0.0);
  return WeightedSites(std::move(centroids), std::move(*weights));
}

std::size_t power_cell_index(const Vector& x, const WeightedSites& sites,
                             const std::optional<Matrix>& q) {
  if (static_cast<std::size_t>(x.size()) != sites.dim()) {
    throw InvalidArgument("power_cell_index: point has dimension " + std::to_string(x.size()) +
                          ", sites have " + std::to_string(sites.dim()));
  }
  if (q) check_spd(*q, sites.dim());
  return rank_sites(sites.size(), [&](std::size_t k) {
           return form(x - sites.centroids()[k], q) + sites.weights()[k];
         }).best;
}

Hyperplane bisector(const Vector& p_i, const Vector& p_j, double w_i, double w_j,
                    const std::optional<Matrix>& q) {
  if (p_i.size() != p_j.size()) throw InvalidArgument("bisector: sites differ in dimension");
  if (p_i == p_j) throw InvalidArgument("bisector: coincident sites");
  if (q) check_spd(*q, static_cast<std::size_t>(p_i.size()));
  const Vector qi = q ? Vector(*q * p_i) : p_i;
  const Vector qj = q ? Vector(*q * p_j) : p_j;
  return Hyperplane{2.0 * (qj - qi), p_j.dot(qj) - p_i.dot(qi) + w_j - w_i};
}

AgreementReport cells_match_regions(const StackedState& x_hat, const EmpiricalMeasure& samples,
                                    const std::optional<QuadraticForm>& q,
                                    const std::optional<std::vector<double>>& weights) {
  if (x_hat.n_targets() != samples.n_targets() || x_hat.state_dim() != samples.state_dim()) {
    throw InvalidArgument("cells_match_regions: samples and x_hat differ in shape");
  }
  if (x_hat.has_duplicate_blocks()) {
    throw InvalidArgument("cells_match_regions: x_hat has repeated target blocks");
  }
  const Classifier prototype(x_hat, q, weights);
  std::vector<Tally> partial(parallel::chunk_count(samples.size()));
  parallel::for_each_chunk(samples.size(), [&](std::size_t c, std::size_t b, std::size_t e) {
    Classifier cls = prototype;
    for (std::size_t i = b; i < e; ++i) cls.classify(samples.column(i), partial[c]);
  });
  return finish(partial);
}

AgreementReport cells_match_regions(const StackedState& x_hat, const GaussianMixtureMeasure& mu,
                                    std::uint64_t seed, std::uint64_t m,
                                    const std::optional<QuadraticForm>& q,
                                    const std::optional<std::vector<double>>& weights) {
  if (x_hat.n_targets() != mu.n_targets() || x_hat.state_dim() != mu.state_dim()) {
    throw InvalidArgument("cells_match_regions: mixture and x_hat differ in shape");
  }
  if (x_hat.has_duplicate_blocks()) {
    throw InvalidArgument("cells_match_regions: x_hat has repeated target blocks");
  }
  const Classifier prototype(x_hat, q, weights);
  std::vector<Tally> partial(parallel::chunk_count(m));
  parallel::for_each_chunk(m, [&](std::size_t c, std::size_t b, std::size_t e) {
    Classifier cls = prototype;
    Vector x(static_cast<Eigen::Index>(mu.dim()));
    for (std::size_t i = b; i < e; ++i) {
      mu.draw(seed, i, x);
      cls.classify(x, partial[c]);
    }
  });
  return finish(partial);
}

std::vector<Segment> export_diagram_2d(const WeightedSites& sites, const std::optional<Matrix>& q,
                                       const BoundingBox& bbox) {
  if (sites.dim() != 2) {
    throw UnsupportedDimension("export_diagram_2d needs 2-D sites, got dimension " +
                               std::to_string(sites.dim()));
  }
  if (!(bbox.lo.array() < bbox.hi.array()).all()) {
    throw InvalidArgument("export_diagram_2d: empty bounding box");
  }
  if (q) check_spd(*q, 2);
  const double extent = (bbox.hi - bbox.lo).norm();

  std::vector<Segment> out;
  const auto& p = sites.centroids();
  const auto w = sites.weights();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = i + 1; j < sites.size(); ++j) {
      const Hyperplane h = bisector(p[i], p[j], w[i], w[j], q);
      const Eigen::Vector2d n(h.normal[0], h.normal[1]);
      const Eigen::Vector2d origin = n * (h.offset / n.squaredNorm());
      const Eigen::Vector2d dir = Eigen::Vector2d(-n[1], n[0]).normalized();

      double t_lo = -std::numeric_limits<double>::infinity();
      double t_hi = std::numeric_limits<double>::infinity();
      // Keeps the t with a * t <= b.
      auto clip = [&](double a, double b) {
        if (a == 0.0) {
          if (b < 0.0) t_hi = -std::numeric_limits<double>::infinity();
        } else if (a > 0.0) {
          t_hi = std::min(t_hi, b / a);
        } else {
          t_lo = std::max(t_lo, b / a);
        }
      };
      for (int axis = 0; axis < 2; ++axis) {
        clip(-dir[axis], origin[axis] - bbox.lo[axis]);
        clip(dir[axis], bbox.hi[axis] - origin[axis]);
      }
      // Site i must not be beaten by any other site along the edge.
      for (std::size_t k = 0; k < sites.size() && t_lo < t_hi; ++k) {
        if (k == i || k == j) continue;
        const Hyperplane hk = bisector(p[i], p[k], w[i], w[k], q);
        const Eigen::Vector2d nk(hk.normal[0], hk.normal[1]);
        clip(nk.dot(dir), hk.offset - nk.dot(origin));
      }
      if (t_hi - t_lo > 1e-12 * extent) {
        out.push_back(Segment{i, j, origin + t_lo * dir, origin + t_hi * dir});
      }
    }
  }
  return out;
}

}  // namespace mospa
