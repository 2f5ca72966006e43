#pragma once

#include <cstddef>
#include <functional>

namespace aniso {

// Global worker count used by the parallel loops below. 0 means "use
// hardware_concurrency". The CLI sets this from --threads.
void set_thread_count(int n);
int thread_count();

// Runs fn(i) for i in [0, n). Work is split into fixed contiguous chunks so
// that results written to preallocated slots are bit-identical regardless of
// scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace aniso
