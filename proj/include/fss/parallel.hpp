#ifndef FSS_PARALLEL_HPP
#define FSS_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fss {

// Runs fn(i) for i in [0, count) on `workers` threads. Work items are
// independent and write to caller-owned slots indexed by i, so the outcome is
// identical for any worker count. The first exception thrown by a work item
// is rethrown on the calling thread after all workers have stopped.
inline void parallel_for(long count, int workers,
                         const std::function<void(long)>& fn) {
  if (count <= 0) return;
  if (workers <= 1 || count == 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const long i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(count, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = static_cast<int>(
      std::min<long>(workers, count));
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fss

#endif
