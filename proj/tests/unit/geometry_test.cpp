#include <gtest/gtest.h>

#include <cmath>

#include "mospa/error.hpp"
#include "mospa/geometry.hpp"
#include "mospa/metric.hpp"
#include "oracles.hpp"

namespace mospa {
namespace {

const Vector kP0 = Eigen::Vector2d(-4.0, 3.0);
const Vector kP1 = Eigen::Vector2d(3.0, -4.0);

WeightedSites mirrored_sites(double w0 = 0.0, double w1 = 0.0) {
  return WeightedSites({kP0, kP1}, {w0, w1});
}

TEST(WeightedSites, Validation) {
  EXPECT_THROW(WeightedSites({}, {}), InvalidArgument);
  EXPECT_THROW(WeightedSites({kP0, kP1}, {0.0}), InvalidArgument);
  EXPECT_THROW(WeightedSites({kP0, kP0}, {0.0, 0.0}), InvalidArgument);
  EXPECT_THROW(WeightedSites({kP0, Vector::Zero(3)}, {0.0, 0.0}), InvalidArgument);
  const auto sites = WeightedSites::from_estimate(StackedState(3, 1, {1.0, 2.0, 3.0}));
  EXPECT_EQ(sites.size(), 6u);
  EXPECT_EQ(sites.centroids()[1], Eigen::Vector3d(1.0, 3.0, 2.0));
}

TEST(PowerCellIndex, Examples) {
  EXPECT_EQ(power_cell_index(Eigen::Vector2d(0.0, 1.0), mirrored_sites()), 0u);
  // On the equal-weight bisector the lower additive weight wins.
  EXPECT_EQ(power_cell_index(Eigen::Vector2d(1.0, 1.0), mirrored_sites(-1.0, 0.0)), 0u);
  EXPECT_EQ(power_cell_index(Eigen::Vector2d(1.0, 1.0), mirrored_sites(0.0, -1.0)), 1u);
  // Exact tie goes to the smaller index.
  EXPECT_EQ(power_cell_index(Eigen::Vector2d(1.0, 1.0), mirrored_sites()), 0u);
  EXPECT_THROW(power_cell_index(Eigen::Vector3d(0.0, 1.0, 2.0), mirrored_sites()), InvalidArgument);
}

TEST(PowerCellIndex, EqualWeightsIsNearestCentroid) {
  testing::Rng rng(1);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Vector> pts;
    for (int k = 0; k < 5; ++k) pts.push_back(Eigen::Vector3d(g(rng), g(rng), g(rng)));
    const WeightedSites sites(pts, std::vector<double>(5, 0.7));
    const Vector x = Eigen::Vector3d(g(rng), g(rng), g(rng));
    std::size_t nearest = 0;
    for (std::size_t k = 1; k < 5; ++k) {
      if ((x - pts[k]).squaredNorm() < (x - pts[nearest]).squaredNorm()) nearest = k;
    }
    EXPECT_EQ(power_cell_index(x, sites), nearest);
  }
}

TEST(PowerCellIndex, ShiftAndScaleInvariance) {
  testing::Rng rng(2);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_real_distribution<double> c(0.1, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Vector> pts;
    std::vector<double> w, shifted, scaled;
    const double shift = g(rng);
    const double s = c(rng);
    for (int k = 0; k < 4; ++k) {
      pts.push_back(Eigen::Vector2d(g(rng), g(rng)));
      w.push_back(g(rng));
      shifted.push_back(w.back() + shift);
      scaled.push_back(s * w.back());
    }
    const Matrix q = testing::random_block_q(rng, 1, 2);
    const Vector x = Eigen::Vector2d(g(rng), g(rng));
    const std::size_t base = power_cell_index(x, WeightedSites(pts, w), q);
    EXPECT_EQ(power_cell_index(x, WeightedSites(pts, shifted), q), base);
    EXPECT_EQ(power_cell_index(x, WeightedSites(pts, scaled), Matrix(s * q)), base);
  }
}

TEST(Bisector, MirroredPairLines) {
  const auto h = bisector(kP0, kP1, 0.0, 0.0);
  EXPECT_EQ(h.normal, Eigen::Vector2d(14.0, -14.0));
  EXPECT_EQ(h.offset, 0.0);

  const auto shifted = bisector(kP0, kP1, 0.0, 2.5);
  EXPECT_EQ(shifted.normal, h.normal);
  EXPECT_EQ(shifted.offset, 2.5);

  Matrix q(2, 2);
  q << 4.0, 0.0, 0.0, 1.0;
  const auto asym = bisector(kP0, kP1, 0.0, 0.0, q);
  EXPECT_EQ(asym.normal, Eigen::Vector2d(56.0, -14.0));
  EXPECT_NEAR(asym.normal.normalized().dot(Eigen::Vector2d(28.0, -7.0).normalized()), 1.0, 1e-15);
  // p_j^T Q p_j - p_i^T Q p_i = (36 + 16) - (64 + 9)
  EXPECT_EQ(asym.offset, -21.0);

  EXPECT_THROW(bisector(kP0, kP0, 0.0, 1.0), InvalidArgument);
}

TEST(Bisector, PointsOnThePlaneAreEquidistant) {
  testing::Rng rng(3);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const Vector pi = Eigen::Vector3d(g(rng), g(rng), g(rng));
    const Vector pj = Eigen::Vector3d(g(rng), g(rng), g(rng));
    const double wi = g(rng), wj = g(rng);
    const Matrix q = testing::random_block_q(rng, 1, 3);
    const auto h = bisector(pi, pj, wi, wj, q);
    // Project a random point onto the plane.
    Vector x = Eigen::Vector3d(g(rng), g(rng), g(rng));
    x -= (h.normal.dot(x) - h.offset) / h.normal.squaredNorm() * h.normal;
    ASSERT_LE(std::abs(h.normal.dot(x) - h.offset), 1e-9 * h.normal.norm());
    const double di = (x - pi).dot(q * (x - pi)) + wi;
    const double dj = (x - pj).dot(q * (x - pj)) + wj;
    EXPECT_NEAR(di, dj, 1e-6 * std::max({1.0, std::abs(di), std::abs(dj)}));
  }
}

TEST(CellsMatchRegions, EqualWeightsAgree) {
  testing::Rng rng(4);
  for (std::size_t n : {1u, 2u, 3u}) {
    const auto mu = testing::random_mixture(rng, n, 2);
    const auto x_hat = testing::random_estimate(rng, n, 2);
    const auto r = cells_match_regions(x_hat, gm_sample(mu, n, 20000));
    EXPECT_EQ(r.agreement, 1.0) << "n=" << n;
    EXPECT_EQ(r.disagreements, 0u);
    EXPECT_EQ(r.compared + r.excluded, 20000u);
  }
  const auto q = QuadraticForm::from_matrix(testing::random_block_q(rng, 3, 2), 3, 2);
  const auto mu = testing::random_mixture(rng, 3, 2);
  EXPECT_EQ(cells_match_regions(testing::random_estimate(rng, 3, 2), gm_sample(mu, 9, 20000), q)
                .agreement,
            1.0);
}

TEST(CellsMatchRegions, UnequalWeightsDisagree) {
  // Overlapping symmetric modes put real mass in the shifted slab.
  const Matrix cov = Matrix::Identity(2, 2);
  const GaussianMixtureMeasure mu(2, 1, {{0.5, Eigen::Vector2d(-0.5, 0.5), cov},
                                         {0.5, Eigen::Vector2d(0.5, -0.5), cov}});
  const StackedState x_hat(2, 1, {-0.5, 0.5});
  const auto r = cells_match_regions(x_hat, gm_sample(mu, 1, 20000), std::nullopt,
                                     std::vector<double>{0.5, 0.0});
  EXPECT_LT(r.agreement, 1.0);
  EXPECT_GT(r.disagreements, 0u);
}

TEST(CellsMatchRegions, StreamedMatchesStored) {
  const auto mu = testing::mirrored_pair_mixture(3.0);
  const StackedState x_hat(2, 1, {-4.0, 3.0});
  const std::vector<double> w{0.5, 0.0};
  const auto stored = cells_match_regions(x_hat, gm_sample(mu, 2, 30000), std::nullopt, w);
  const auto streamed = cells_match_regions(x_hat, mu, 2, 30000, std::nullopt, w);
  EXPECT_EQ(stored.compared, streamed.compared);
  EXPECT_EQ(stored.disagreements, streamed.disagreements);
  EXPECT_GT(streamed.disagreements, 0u);
}

TEST(ExportDiagram2d, MirroredPairSegment) {
  const auto segs = export_diagram_2d(mirrored_sites(), std::nullopt, BoundingBox::square(-10, 10));
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].i, 0u);
  EXPECT_EQ(segs[0].j, 1u);
  EXPECT_TRUE(segs[0].a.isApprox(Eigen::Vector2d(-10, -10), 1e-14));
  EXPECT_TRUE(segs[0].b.isApprox(Eigen::Vector2d(10, 10), 1e-14));
}

TEST(ExportDiagram2d, WeightOffsetTranslatesAlongNormal) {
  const double delta = 3.0;
  const auto base = export_diagram_2d(mirrored_sites(), std::nullopt, BoundingBox::square(-10, 10));
  const auto moved =
      export_diagram_2d(mirrored_sites(0.0, delta), std::nullopt, BoundingBox::square(-10, 10));
  ASSERT_EQ(moved.size(), 1u);
  const Eigen::Vector2d unit = (kP1 - kP0).normalized();
  const double expected = delta / (2.0 * (kP1 - kP0).norm());
  EXPECT_NEAR(unit.dot(moved[0].a - base[0].a), expected, 1e-12);
  EXPECT_NEAR(unit.dot(moved[0].b - base[0].b), expected, 1e-12);
}

TEST(ExportDiagram2d, ThreeSitesMeetAtOnePoint) {
  const WeightedSites sites({Eigen::Vector2d(0, 0), Eigen::Vector2d(4, 0), Eigen::Vector2d(0, 4)},
                            {0.0, 0.0, 0.0});
  const auto segs = export_diagram_2d(sites, std::nullopt, BoundingBox::square(-10, 10));
  ASSERT_EQ(segs.size(), 3u);
  const Eigen::Vector2d centre(2, 2);
  for (const auto& s : segs) {
    const double d = std::min((s.a - centre).norm(), (s.b - centre).norm());
    EXPECT_LT(d, 1e-12);
  }
}

TEST(ExportDiagram2d, SingleSiteAndDimension) {
  EXPECT_TRUE(export_diagram_2d(WeightedSites({kP0}, {0.0}), std::nullopt, BoundingBox::square(-1, 1))
                  .empty());
  const WeightedSites planar3({Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0)}, {0.0, 0.0});
  EXPECT_THROW(export_diagram_2d(planar3, std::nullopt, BoundingBox::square(-1, 1)),
               UnsupportedDimension);
}

}  // namespace
}  // namespace mospa
