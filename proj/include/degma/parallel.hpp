#pragma once

#include <cstddef>
#include <functional>

namespace degma {

// Worker count from DEGMA_THREADS, else the hardware concurrency.
int thread_count();

// Calls body(begin, end) on disjoint chunks of [0, n). Results written to
// disjoint slots are deterministic regardless of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace degma
