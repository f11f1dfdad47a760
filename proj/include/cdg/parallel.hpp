#pragma once

#include <functional>

namespace cdg {

/// Worker count: CDG_THREADS if set (>= 1), else hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, n) over thread_count() workers. Each index is
/// visited exactly once; callers write results into per-index slots so the
/// output does not depend on scheduling. The first exception is rethrown.
void parallel_for(int n, const std::function<void(int)>& body);

} // namespace cdg
