#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pinlab {

// Runs fn(0), ..., fn(n-1) on up to `workers` threads.  Tasks are handed out
// by an atomic counter, so which thread runs which index is scheduling
// dependent; callers that need determinism must write results into
// index-addressed slots and fold them in index order afterwards.  If any task
// throws, the exception for the smallest failing index is rethrown after all
// threads have joined.
inline void parallel_for_index(std::int64_t n, int workers,
                               const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int threads = static_cast<int>(
      std::min<std::int64_t>(workers, n));
  std::atomic<std::int64_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error = nullptr;
  std::int64_t first_error_index = n;
  auto body = [&]() {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (i < first_error_index) {
          first_error_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace pinlab
