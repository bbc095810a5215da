#pragma once

#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace gransac {

// Thread count used when a config asks for "all cores". GRANSAC_THREADS
// overrides the hardware count.
inline int default_threads() {
  if (const char* env = std::getenv("GRANSAC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Runs fn(i) for i in [begin, end) on up to `threads` threads. Each worker
// owns a contiguous block, so results written to index i never race and the
// outcome is identical for every thread count. The first exception thrown by
// any worker is rethrown on the calling thread.
inline void parallel_for(int begin, int end, int threads, const std::function<void(int)>& fn) {
  const int n = end - begin;
  if (n <= 0) return;
  if (threads <= 0) threads = default_threads();
  if (threads > n) threads = n;
  if (threads == 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }

  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::vector<std::exception_ptr> errors(threads);
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = begin + t * chunk;
    const int hi = lo + chunk < end ? lo + chunk : end;
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, t, &fn, &errors] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace gransac
