#pragma once

#include <cstddef>
#include <functional>

namespace hsl {

/// Environment variable that caps worker threads.
inline constexpr const char* kThreadsEnvVar = "HSL_SIM_THREADS";

/// Worker count: min(HSL_SIM_THREADS, hardware concurrency), at least 1.
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Work is split into contiguous chunks; results
/// must be written by index so the outcome does not depend on the thread count.
/// The first exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace hsl
