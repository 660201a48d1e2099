#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace glasscape {

/// Worker count, capped by GLASSCAPE_THREADS when set.
inline unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GLASSCAPE_THREADS")) {
    try {
      long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(std::min<long>(v, hw));
    } catch (const std::exception&) {
    }
  }
  return hw;
}

/**
 * Runs f(i) for i in [0,n) on contiguous static chunks.  f must write its
 * result to slot i, so the outcome does not depend on the worker count.
 */
template <class F>
void parallel_for(std::size_t n, F&& f) {
  unsigned w = std::min<std::size_t>(worker_count(), n);
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr err;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < w; ++t) {
    std::size_t lo = n * t / w, hi = n * (t + 1) / w;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace glasscape
