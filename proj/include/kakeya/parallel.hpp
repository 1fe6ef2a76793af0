#pragma once

// Deterministic fork-join loop. Work is split into contiguous blocks; callers
// write results into per-index slots and reduce afterwards in index order, so
// outputs do not depend on the thread count.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kakeya {

/// Current cap: set_thread_count, else KAKEYA_LAB_THREADS, else hardware concurrency.
int thread_count();
/// n <= 0 restores the default resolution.
void set_thread_count(int n);

/// Calls body(i) for i in [0, n). If any call throws, the exception from the
/// smallest failing index is rethrown after all workers finish.
template <class F>
void parallel_for(std::size_t n, F&& body) {
  if (n == 0) return;
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t block = std::max<std::size_t>(1, n / (workers * 8));
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::size_t err_index = n;
  std::exception_ptr err;

  auto work = [&] {
    for (;;) {
      std::size_t begin = next.fetch_add(block);
      if (begin >= n) return;
      std::size_t end = std::min(n, begin + block);
      for (std::size_t i = begin; i < end; ++i) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (i < err_index) {
            err_index = i;
            err = std::current_exception();
          }
        }
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace kakeya
