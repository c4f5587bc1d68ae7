#pragma once

#include <cstdint>
#include <functional>

namespace anw {

/// Worker count from ANW_NUM_THREADS (default 1, clamped to [1, 256]).
int thread_count();
/// Process-wide override of the worker count; 0 restores the environment value.
void set_thread_count(int threads);

/// Runs body(i) for i in [0, n). Each index runs exactly once; callers only
/// write to per-index outputs, so results do not depend on the thread count.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body);

}  // namespace anw
