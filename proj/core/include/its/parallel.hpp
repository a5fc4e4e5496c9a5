#pragma once

#include <cstddef>
#include <functional>

namespace its {

/// Worker count used by the parallel stages. Defaults to ITS_THREADS, or the
/// hardware concurrency when that variable is unset.
unsigned thread_count();
void set_thread_count(unsigned n);

/// Runs body(i) for i in [0, n) over contiguous chunks. Each index is visited
/// exactly once; results written to per-index slots are schedule independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t begin, std::size_t end)>& body);

}  // namespace its
