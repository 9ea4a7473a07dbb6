#pragma once

#include <functional>

namespace qwalk {

/// QWALK_THREADS if set and positive, otherwise the number of logical cores.
int default_thread_count();
void set_thread_count(int n);
int thread_count();

/// Splits [0, n) into contiguous chunks, one per worker, and runs
/// body(begin, end) on each. Chunk boundaries depend only on n and the
/// thread count; callers that reduce per chunk must combine in chunk order.
void parallel_for(int n, const std::function<void(int, int)>& body);

}  // namespace qwalk
