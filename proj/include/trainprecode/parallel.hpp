// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace trainprecode {

/// Worker count: hardware concurrency capped by the TRAINPRECODE_THREADS env var.
std::size_t thread_cap();

/// Runs fn(tile_index, begin, end) over fixed-size tiles of [0, n).
/// The tiling is independent of the worker count, so per-tile results can be
/// reduced in index order for runs that must not depend on threading.
void parallel_tiles(std::size_t n, std::size_t tile,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace trainprecode
