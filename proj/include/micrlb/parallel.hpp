#pragma once

#include <cstddef>
#include <functional>

namespace micrlb {

/// Worker count used by the Monte-Carlo oracles and sweeps. Initialized from
/// MICRLB_THREADS when set, otherwise from the hardware concurrency.
unsigned thread_count();
void set_thread_count(unsigned n);

/// Runs task(i) for i in [0, n) on up to thread_count() workers. Tasks must
/// write only to their own slot; callers reduce in index order afterwards so
/// results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

}  // namespace micrlb
