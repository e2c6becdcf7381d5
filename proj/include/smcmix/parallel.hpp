#pragma once

#include <cstddef>
#include <functional>

namespace smcmix {

/// Worker cap: SMCMIX_THREADS if set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
std::size_t thread_limit();

/// Calls body(i) for i in [0, n) on up to thread_limit() threads. Each index
/// runs exactly once; the exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace smcmix
