#pragma once

#include <cstddef>
#include <functional>

namespace foucault {

// FOUCAULT_THREADS if set to a positive integer, else the hardware count.
unsigned default_thread_count();

// Calls fn(i) for i in [0, n) on up to `threads` workers. Work is handed out
// by index, so results written to per-index slots are independent of the
// thread count. The first exception thrown by fn is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, unsigned threads);

}  // namespace foucault
