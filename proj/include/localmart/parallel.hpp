#pragma once

#include <cstddef>
#include <functional>

namespace localmart {

/// Worker count: LOCALMART_THREADS when set and positive, else the hardware
/// concurrency (at least 1).
std::size_t worker_count();

/// Runs body(begin, end) over a static partition of [0, n). Every index is
/// visited exactly once; callers write only to per-index slots, so results do
/// not depend on the partition. The first exception thrown by any worker is
/// rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Sum of term(0) + ... + term(n - 1) with a fixed association: fixed-size
/// blocks summed left to right, then a pairwise tree over the block sums. The
/// result is bit-identical for every worker count.
double deterministic_sum(std::size_t n, const std::function<double(std::size_t)>& term);

}  // namespace localmart
