#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "mospa/parallel.hpp"
#include "mospa/random.hpp"

namespace mospa {
namespace {

class ThreadCount : public ::testing::Test {
 protected:
  void SetUp() override { saved_ = parallel::thread_count(); }
  void TearDown() override { parallel::set_thread_count(saved_); }
  std::size_t saved_ = 1;
};

TEST_F(ThreadCount, EveryIndexVisitedOnce) {
  parallel::set_thread_count(4);
  const std::size_t n = 3 * parallel::kChunkSize + 17;
  std::vector<std::atomic<int>> hits(n);
  parallel::for_each_chunk(n, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) ++hits[i];
  });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST_F(ThreadCount, SumIsBitIdenticalAcrossThreadCounts) {
  const std::size_t n = 100003;
  auto f = [](std::size_t i) { return std::sin(static_cast<double>(i)) * 1e-3 + 1.0 / (1.0 + i); };
  parallel::set_thread_count(1);
  const double one = parallel::deterministic_sum(n, f);
  for (std::size_t t : {2u, 3u, 8u}) {
    parallel::set_thread_count(t);
    EXPECT_EQ(parallel::deterministic_sum(n, f), one) << t << " threads";
  }
}

TEST_F(ThreadCount, ExceptionsPropagate) {
  parallel::set_thread_count(3);
  EXPECT_THROW(parallel::for_each_chunk(10 * parallel::kChunkSize,
                                        [](std::size_t c, std::size_t, std::size_t) {
                                          if (c == 5) throw std::runtime_error("boom");
                                        }),
               std::runtime_error);
}

TEST(CounterStream, PureFunctionOfKey) {
  CounterStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  for (int k = 0; k < 10; ++k) {
    const auto va = a();
    EXPECT_EQ(va, b());
    EXPECT_NE(va, c());
    EXPECT_NE(va, d());
  }
}

}  // namespace
}  // namespace mospa
