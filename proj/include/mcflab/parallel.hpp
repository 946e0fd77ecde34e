#pragma once
#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace mcflab {

// Number of worker threads. Controlled by MCFLAB_THREADS (default 1).
// Parallelism is only ever applied across independent per-index outputs,
// so results are bitwise identical for every thread count.
inline int thread_count() {
  static int cached = [] {
    const char* env = std::getenv("MCFLAB_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    if (v < 1) v = 1;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw > 0 && v > static_cast<int>(hw)) v = static_cast<int>(hw);
    return v;
  }();
  return cached;
}

// Run fn(i) for i in [0, n). Each index is processed exactly once by one
// thread (static contiguous chunks); fn must only write state owned by
// index i. Reductions stay serial in the callers.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  int nt = thread_count();
  if (nt <= 1 || n < 512) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t chunk = (n + nt - 1) / nt;
  std::vector<std::thread> workers;
  workers.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace mcflab
