#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace flmgof {

/// Worker count: FLMGOF_THREADS if set and positive, else hardware concurrency.
inline std::size_t worker_count() {
  if (const char* env = std::getenv("FLMGOF_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs body(i) for i in [begin, end) over contiguous static chunks.
///
/// Every index is processed exactly once and bodies only write state owned by
/// their index, so results never depend on the worker count. The first
/// exception thrown by any body is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t begin, std::size_t end, Body&& body,
                  std::size_t workers = 0) {
  if (end <= begin) return;
  const std::size_t total = end - begin;
  if (workers == 0) workers = worker_count();
  workers = std::min(workers, total);
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }

  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  const std::size_t chunk = (total + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    threads.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace flmgof
