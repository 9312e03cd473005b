#pragma once

#include <cstddef>
#include <functional>

namespace corex {

/// Worker count: hardware concurrency, capped by the COREX_THREADS environment variable.
std::size_t thread_count();

/// Overrides thread_count() for the current process; 0 restores the default.
void set_thread_count(std::size_t n);

/// Runs body(begin, end) over disjoint chunks of [0, n). Blocks until all chunks finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace corex
