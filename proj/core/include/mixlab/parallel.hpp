#pragma once

#include <cstddef>
#include <functional>

namespace mixlab {

/// Worker count honoured by every parallel loop in the library.
/// Reads MIXLAB_THREADS once (values < 1 are ignored); falls back to
/// std::thread::hardware_concurrency().
std::size_t max_threads();

/// Runs body(i) for i in [0, n). Iterations must not share mutable state;
/// results are independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mixlab
