#include <gtest/gtest.h>

#include "mospa/error.hpp"
#include "mospa/theorem.hpp"
#include "oracles.hpp"

namespace mospa {
namespace {

Scenario mirrored_scenario(std::uint64_t seed = 1) {
  return Scenario{2, 1, testing::mirrored_pair_mixture(), std::nullopt, seed, 2000};
}

TEST(VerifyTheorem1, MirroredPairSameSample) {
  const auto r = verify_theorem1(mirrored_scenario(), StackedState(2, 1, {-4.0, 3.0}),
                                 VerifyMode::kSameSample, 2000);
  EXPECT_TRUE(r.passed);
  EXPECT_LE(r.abs_diff, 1e-8 * r.mospa_value);
  EXPECT_EQ(r.abs_diff, std::abs(r.mospa_value - r.w2_squared));
  EXPECT_EQ(r.masses.size(), 2u);
  EXPECT_EQ(r.support_size, 2u);
}

TEST(VerifyTheorem1, SingleTargetIsTheMse) {
  testing::Rng rng(1);
  const Scenario sc{1, 2, testing::random_mixture(rng, 1, 2), std::nullopt, 3, 500};
  const auto r = verify_theorem1(sc, StackedState(1, 2, {0.5, -0.5}), VerifyMode::kSameSample, 500);
  EXPECT_TRUE(r.passed);
  EXPECT_LE(r.abs_diff, 1e-12 * r.mospa_value);
  EXPECT_EQ(r.masses, std::vector<double>{1.0});
}

TEST(VerifyTheorem1, RandomScenariosSameSample) {
  testing::Rng rng(2);
  for (std::size_t n : {2u, 3u, 4u}) {
    for (std::size_t nx : {1u, 2u}) {
      const auto sc = testing::random_scenario(rng, n, nx, n * 10 + nx, 2000);
      const auto r = verify_theorem1(sc, testing::random_estimate(rng, n, nx),
                                     VerifyMode::kSameSample, 2000);
      EXPECT_TRUE(r.passed) << "n=" << n << " nx=" << nx << " rel " << r.rel_diff;
      EXPECT_LE(r.rel_diff, 1e-8);
    }
  }
}

TEST(VerifyTheorem1, GospaFormSameSample) {
  testing::Rng rng(3);
  for (std::size_t n : {2u, 3u}) {
    const auto sc = testing::random_scenario(rng, n, 2, n, 2000);
    const auto q = QuadraticForm::from_matrix(testing::random_block_q(rng, n, 2), n, 2);
    const auto r = verify_theorem1(sc, testing::random_estimate(rng, n, 2),
                                   VerifyMode::kSameSample, 2000, q);
    EXPECT_TRUE(r.passed) << r.rel_diff;
  }
}

TEST(VerifyTheorem1, IndependentMode) {
  testing::Rng rng(4);
  const auto sc = testing::random_scenario(rng, 3, 2, 77, 100000);
  const auto r = verify_theorem1(sc, testing::random_estimate(rng, 3, 2),
                                 VerifyMode::kIndependent, 100000);
  EXPECT_EQ(r.mode, VerifyMode::kIndependent);
  EXPECT_GT(r.mospa_std_error, 0.0);
  EXPECT_GT(r.w2_std_error, 0.0);
  EXPECT_NEAR(r.tolerance, 4.0 * std::hypot(r.mospa_std_error, r.w2_std_error), 1e-15);
  EXPECT_TRUE(r.passed) << r.abs_diff << " vs " << r.tolerance;
  // Disjoint sample sets: the two sides are not bit-identical.
  EXPECT_NE(r.mospa_value, r.w2_squared);
}

TEST(VerifyTheorem1, Errors) {
  EXPECT_THROW(verify_theorem1(mirrored_scenario(), StackedState(2, 1, {1.0, 1.0}),
                               VerifyMode::kSameSample, 100),
               InvalidArgument);
  EXPECT_THROW(verify_theorem1(mirrored_scenario(), StackedState(1, 2, {1.0, 2.0}),
                               VerifyMode::kSameSample, 100),
               InvalidArgument);
  testing::Rng rng(5);
  const Scenario big{9, 1, testing::random_mixture(rng, 9, 1, 1), std::nullopt, 0, 10};
  EXPECT_THROW(verify_theorem1(big, testing::random_estimate(rng, 9, 1), VerifyMode::kSameSample, 10),
               CapacityError);
}

}  // namespace
}  // namespace mospa
