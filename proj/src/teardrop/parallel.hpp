#pragma once

#include <cstddef>
#include <functional>

namespace teardrop {

/// Worker count from TEARDROP_THREADS (0 or unset = hardware concurrency).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) across worker_count() threads. Each index is
/// visited exactly once; the body must not share mutable state across indices.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace teardrop
