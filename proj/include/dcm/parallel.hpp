#pragma once

#include <cstddef>
#include <functional>

namespace dcm {

/// Process-wide worker count used by parallel_for. Defaults to DCM_THREADS if set,
/// otherwise hardware concurrency. Clamped to [1, 256].
int thread_count();
void set_thread_count(int n);

/// Runs fn(begin, end) over a fixed chunking of [0, n). Chunk boundaries depend only
/// on n and grain (not on the worker count), so any per-chunk output layout is
/// reproducible across thread settings. Chunks are disjoint; fn must not touch state
/// outside its range unless that state is owned per chunk.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                  std::size_t grain = 1024);

}  // namespace dcm
