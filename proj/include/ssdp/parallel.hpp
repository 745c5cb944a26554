#pragma once

#include <cstddef>
#include <functional>

namespace ssdp {

/// Worker cap from SSDP_THREADS (0 or unset = hardware concurrency).
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
/// visited exactly once; callers write results to per-index slots and reduce
/// in index order, which keeps results independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ssdp
