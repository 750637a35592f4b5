#pragma once

#include <cstddef>
#include <functional>

namespace nlft {

/// Upper bound on worker threads used by grid and table evaluations.
/// 0 means std::thread::hardware_concurrency().
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs body(i) for i in [0, n). Indices are split into contiguous blocks, one
/// per worker; each body writes only its own output slot, so results do not
/// depend on the thread count. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace nlft
