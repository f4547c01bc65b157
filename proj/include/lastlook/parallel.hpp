#pragma once

#include <cstddef>
#include <functional>

namespace lastlook {

// Worker count from LASTLOOK_THREADS, else hardware concurrency (at least 1).
[[nodiscard]] unsigned thread_count();

// Calls body(i) for i in [0, n) across thread_count() workers. Each index is
// visited exactly once; body must only write state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lastlook
