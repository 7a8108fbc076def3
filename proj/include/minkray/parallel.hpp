#ifndef MINKRAY_PARALLEL_HPP
#define MINKRAY_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "minkray/types.hpp"

namespace minkray {

/// Resolves a worker request: 0 means one per hardware thread.
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count) split into contiguous blocks, one per
/// worker. Block boundaries depend only on count and workers, so per-index
/// results are independent of scheduling. The first exception is rethrown.
template <class Fn>
void parallel_for(Index count, int workers, Fn&& fn) {
  workers = std::max(1, std::min<int>(resolve_workers(workers), int(std::max<Index>(count, 1))));
  if (workers == 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex mu;
  std::vector<std::thread> pool;
  const Index block = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const Index lo = w * block, hi = std::min(count, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (Index i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace minkray

#endif  // MINKRAY_PARALLEL_HPP
