#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace dvfinv {

// Worker cap shared by every voxel-parallel kernel. Defaults to the value of
// DVFINV_THREADS when set, otherwise the hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Splits [0, n) into contiguous chunks and calls body(begin, end) for each.
// Chunk boundaries depend only on n and the worker count; kernels write to
// disjoint outputs, so results do not depend on scheduling.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, thread_count())),
                            std::max<std::size_t>(1, n / 4096));
  if (workers <= 1) {
    body(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&body, b, e] { body(b, e); });
  }
  body(std::size_t{0}, std::min(n, chunk));
}

}  // namespace dvfinv
