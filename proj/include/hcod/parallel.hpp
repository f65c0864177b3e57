#pragma once

#include <cstddef>
#include <functional>

namespace hcod {

// Worker count from HCOD_THREADS: unset or 0 means hardware concurrency,
// invalid values fall back to 1.
int thread_count();

// Calls fn(i) for every i in [0, n) on up to thread_count() threads. Each
// index is visited exactly once; callers write results into slot i so output
// order never depends on scheduling. The first exception thrown is rethrown.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

}  // namespace hcod
