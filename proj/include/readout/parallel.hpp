#pragma once

#include <cstddef>
#include <functional>

namespace readout {

// Worker count: READOUT_OPT_THREADS if set (clamped to >= 1), else the
// hardware concurrency.
int worker_count();

// Runs fn(0..n-1) across workers with a static block partition. Callers must
// only write to per-index slots; reductions stay with the caller so results
// never depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace readout
