#pragma once

#include <cstddef>
#include <functional>

namespace skewlab {

/// Worker count: `SKEWLAB_THREADS` when set to a positive integer, else the
/// hardware concurrency. An explicit override (see set_thread_count) wins.
std::size_t thread_count();

/// Overrides the worker count for the current process; 0 restores the
/// environment-derived default.
void set_thread_count(std::size_t n);

/// Calls `body(i)` for every i in [0, n). Indices are split into contiguous
/// blocks, one per worker. Callers write results into per-index slots and
/// reduce sequentially afterwards, which keeps outputs independent of the
/// worker count. The first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace skewlab
