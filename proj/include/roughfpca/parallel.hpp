#pragma once

#include <cstddef>
#include <functional>

namespace roughfpca {

/// Worker count used by replicate loops. Defaults to $ROUGHFPCA_THREADS, else the hardware
/// concurrency.
unsigned thread_count();
void set_thread_count(unsigned n);

/// Runs body(i) for i in [0, n) on thread_count() workers. Each index is visited exactly
/// once; callers write results by index so the outcome does not depend on scheduling.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace roughfpca
