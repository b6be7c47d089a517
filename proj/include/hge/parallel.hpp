#pragma once

#include <thread>
#include <vector>

#include "hge/types.hpp"

namespace hge {

// Contiguous-chunk parallel loop. Each index is processed exactly once and
// writes only its own slot, so results do not depend on the thread count.
template <class Fn>
void parallel_for(Index n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = static_cast<int>(std::min<Index>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const Index chunk = (n + workers - 1) / workers;
  for (int t = 0; t < workers; ++t) {
    const Index lo = static_cast<Index>(t) * chunk;
    const Index hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (Index i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace hge
