#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace rssloc {

// Worker count from the RSSLOC_WORKERS environment variable (>= 1).
// Workers only affect wall time, never results: every parallel loop in the
// library writes by index or reduces over a fixed tree.
inline int worker_count() {
  if (const char* env = std::getenv("RSSLOC_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

// Runs fn(i) for i in [0, count) on `workers` threads, work-stealing by
// atomic index. fn must only touch per-index state.
inline void parallel_for(int count, const std::function<void(int)>& fn,
                         int workers) {
  if (count <= 0) return;
  if (workers <= 1 || count == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto run = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min(workers, count);
  pool.reserve(n - 1);
  for (int w = 1; w < n; ++w) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
}

}  // namespace rssloc
