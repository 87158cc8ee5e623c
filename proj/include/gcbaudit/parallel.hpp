#pragma once

#include <cstddef>
#include <functional>

namespace gcbaudit {

/// Worker count used by the library's parallel loops. Results never depend
/// on it: every loop index writes only its own output slot.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs fn(i) for i in [0, n), split into contiguous chunks across workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace gcbaudit
