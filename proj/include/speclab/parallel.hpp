#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace speclab {

inline int default_jobs() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.  Work is handed out
/// in contiguous chunks; callers write results into pre-sized slots indexed
/// by i, so the merge order is deterministic regardless of scheduling.
/// The first exception thrown by any worker is rethrown on the caller.
inline void parallel_for(std::int64_t n, int jobs,
                         const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) return;
  jobs = std::max(1, jobs);
  if (jobs == 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  int workers = static_cast<int>(std::min<std::int64_t>(jobs, n));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  const std::int64_t chunk = std::max<std::int64_t>(1, n / (8 * workers));
  auto body = [&]() {
    for (;;) {
      std::int64_t begin = next.fetch_add(chunk);
      if (begin >= n) return;
      std::int64_t end = std::min(n, begin + chunk);
      try {
        for (std::int64_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(workers) - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace speclab
