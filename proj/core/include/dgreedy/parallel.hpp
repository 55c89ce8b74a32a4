#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace dgreedy {

// Number of worker threads used by sweeps; 0 selects hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, n). Each index is visited exactly once; results
// must be written to per-index slots so the outcome does not depend on scheduling.
// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dgreedy
