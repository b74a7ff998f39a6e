#pragma once

#include <cstddef>
#include <functional>

namespace pd36 {

/// Number of worker threads used by parallel_for. Defaults to the hardware
/// concurrency. Work decomposition never depends on this value, so results
/// are bit-identical for any setting.
void set_num_threads(std::size_t n);
std::size_t num_threads();

/// Runs fn(i) for i in [0, count). Each index must write disjoint memory.
void parallel_for(std::size_t count, const std::function<void(std::size_t)> &fn);

} // namespace pd36
