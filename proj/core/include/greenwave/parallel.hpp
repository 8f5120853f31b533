#pragma once

#include <cstddef>
#include <functional>

namespace greenwave {

/// Worker count: GW_THREADS if set to a positive integer, otherwise the
/// hardware concurrency.
std::size_t worker_count();

/// Calls fn(i) for i in [0, count) on up to worker_count() threads. Each
/// index runs exactly once; the exception of the lowest failing index is
/// rethrown after all workers finish.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace greenwave
