#pragma once

#include <cstdint>
#include <functional>

namespace ffcnn {

// Process-wide worker count for kernel parallelism. 0 = hardware concurrency.
void set_worker_threads(int n);
int worker_threads();

// Runs fn(begin, end) over a partition of [0, n). Work is split into
// contiguous chunks; every chunk computes disjoint output elements, so
// results are independent of the worker count.
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn);

}  // namespace ffcnn
