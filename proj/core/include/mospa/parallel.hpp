#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace mospa::parallel {

/// Work is always split into chunks of this many items, independent of the
/// thread count, so per-chunk partial results combine in a fixed order.
inline constexpr std::size_t kChunkSize = 4096;

/// Worker count used by data-parallel loops. Defaults to the MOSPA_THREADS
/// environment variable, else std::thread::hardware_concurrency().
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Calls body(chunk_index, begin, end) for every chunk of [0, n).
void for_each_chunk(std::size_t n,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline std::size_t chunk_count(std::size_t n) { return (n + kChunkSize - 1) / kChunkSize; }

/// Sum of f(i) over [0, n): chunk partials first, then chunks left to right.
/// Bit-identical for any thread count.
template <typename F>
double deterministic_sum(std::size_t n, F&& f) {
  std::vector<double> partial(chunk_count(n), 0.0);
  for_each_chunk(n, [&](std::size_t c, std::size_t b, std::size_t e) {
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += f(i);
    partial[c] = s;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace mospa::parallel
