#pragma once

#include <cstddef>
#include <functional>

namespace phid::util {

/// Runs body(i) for i in [0, n) on up to `jobs` threads and joins them.
/// jobs <= 1 runs inline in index order. The first exception thrown by any
/// task is rethrown after all workers finished.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

} // namespace phid::util
