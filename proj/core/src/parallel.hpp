#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace weier::detail {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : static_cast<int>(h);
}

// Splits [0, n) into contiguous ranges, one per worker; f(worker, begin, end).
// The first exception thrown by a worker is rethrown after all workers join.
template <class F>
void parallel_ranges(std::uint64_t n, int threads, F&& f) {
  const auto t = static_cast<std::uint64_t>(std::max<std::int64_t>(
      1, std::min<std::int64_t>(resolve_threads(threads), static_cast<std::int64_t>(std::max<std::uint64_t>(n, 1)))));
  if (t == 1) {
    f(0, std::uint64_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> err(t);
  for (std::uint64_t w = 0; w < t; ++w) {
    pool.emplace_back([&, w] {
      try {
        f(static_cast<int>(w), n * w / t, n * (w + 1) / t);
      } catch (...) {
        err[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
}

inline int worker_count(std::uint64_t n, int threads) {
  return static_cast<int>(std::max<std::int64_t>(
      1, std::min<std::int64_t>(resolve_threads(threads), static_cast<std::int64_t>(std::max<std::uint64_t>(n, 1)))));
}

}  // namespace weier::detail
