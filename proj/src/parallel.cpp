// SPDX-License-Identifier: Apache-2.0
#include "trainprecode/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace trainprecode {

std::size_t thread_cap() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TRAINPRECODE_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && v >= 1) n = std::min<std::size_t>(n, v);
  }
  return n;
}

void parallel_tiles(std::size_t n, std::size_t tile,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (tile == 0) tile = 1;
  const std::size_t n_tiles = (n + tile - 1) / tile;
  const std::size_t workers = std::min(thread_cap(), n_tiles);
  if (workers <= 1) {
    for (std::size_t t = 0; t < n_tiles; ++t) fn(t, t * tile, std::min(n, (t + 1) * tile));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= n_tiles) return;
      fn(t, t * tile, std::min(n, (t + 1) * tile));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (auto& th : pool) th.join();
}

}  // namespace trainprecode
