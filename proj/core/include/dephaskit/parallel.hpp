#pragma once

#include <cstddef>
#include <functional>

namespace dephaskit {

// Calls fn(i) for i in [0, n) on up to `jobs` threads (jobs <= 0 means the
// hardware concurrency). Indices are handed out in increasing order. If any
// call throws, the exception from the lowest failing index is rethrown after
// all workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

int default_jobs();

}  // namespace dephaskit
