#pragma once

#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace kcx {

/// Resolve an effective worker count: an explicit request wins, then the
/// KCX_THREADS environment variable, then the hardware concurrency.
inline int resolve_threads(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("KCX_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Run body(i) for i in [begin, end) on up to `threads` workers using a
/// static contiguous partition. Each index is visited exactly once; bodies
/// must write only to their own slot so results do not depend on the
/// worker count. The first worker exception is rethrown on the caller.
template <class F>
void parallel_for(std::size_t begin, std::size_t end, int threads, F&& body) {
  const std::size_t n = end > begin ? end - begin : 0;
  if (n == 0) return;
  const int t = std::min<std::size_t>(std::max(threads, 1), n);
  if (t == 1) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  const std::size_t chunk = (n + t - 1) / t;

  auto run_chunk = [&](std::size_t lo, std::size_t hi) {
    try {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  std::vector<std::thread> workers;
  workers.reserve(t - 1);
  for (int w = 1; w < t; ++w) {
    const std::size_t lo = begin + w * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back(run_chunk, lo, hi);
  }
  run_chunk(begin, std::min(end, begin + chunk));
  for (auto& w : workers) w.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace kcx
