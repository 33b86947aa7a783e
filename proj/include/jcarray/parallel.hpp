#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace jcarray {

/// Resolves a worker request: 0 means one per hardware thread.
inline std::size_t resolve_workers(std::size_t requested, std::size_t tasks) {
  std::size_t w = requested;
  if (w == 0) w = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(w, tasks));
}

/// Runs task(i) for i in [0, n) on up to `workers` threads. Tasks are pulled
/// from a shared counter, so results must be written to per-index slots.
/// If tasks throw, the exception of the lowest failing index is rethrown
/// after all threads have joined.
template <class Task>
void parallel_for(std::size_t n, std::size_t workers, Task&& task) {
  if (n == 0) return;
  const std::size_t w = resolve_workers(workers, n);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  std::size_t error_index = n;

  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };

  if (w == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (std::size_t t = 0; t < w; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace jcarray
