#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace advreg {

// Configuration / validation problem: bad field values, unknown keys.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A solver or replication failed in a way that invalidates the result.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Work refused because it would exceed a resource limit.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs body(i) for i in [0, count). Work items are independent; results must
// be written to caller-owned slots indexed by i so the outcome does not
// depend on the number of workers. The first exception thrown by any worker
// is rethrown after all workers finish.
inline void parallel_for(long long count, int jobs,
                         const std::function<void(long long)>& body) {
  if (count <= 0) return;
  if (jobs <= 1 || count == 1) {
    for (long long i = 0; i < count; ++i) body(i);
    return;
  }
  int workers = static_cast<int>(std::min<long long>(jobs, count));
  std::atomic<long long> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!failed.load(std::memory_order_relaxed)) {
        long long i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= count) break;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true, std::memory_order_relaxed);
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Greatest integer strictly less than beta. This is the floor convention used
// throughout for smoothness indices: the top derivative order of a
// beta-smooth function, so e.g. beta = 1 maps to 0.
inline int smoothness_floor(double beta) {
  return static_cast<int>(std::ceil(beta)) - 1;
}

// Numerically stable sum: pairwise reduction over a fixed index order, so the
// result is independent of thread count and scheduling.
inline double pairwise_sum(const std::vector<double>& values, std::size_t lo,
                           std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += values[i];
    return s;
  }
  std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(values, lo, mid) + pairwise_sum(values, mid, hi);
}

inline double pairwise_sum(const std::vector<double>& values) {
  return pairwise_sum(values, 0, values.size());
}

}  // namespace advreg
