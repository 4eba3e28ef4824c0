#pragma once

#include <cstddef>
#include <functional>

namespace mfldp {

// MFLDP_JOBS if set and positive, else the hardware concurrency (at least 1).
int default_jobs();

// Runs body(i) for i in [0, n) on up to `jobs` threads. The first exception
// thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace mfldp
