#pragma once

#include <cstdint>
#include <functional>

namespace gpaf {

/// Hardware concurrency, at least 1.
int default_threads();

/// Calls job(r) for r in [0, replicas) on up to `threads` worker threads
/// (0 means default_threads()). Replicas are handed out in order from a
/// shared counter. The first exception thrown by any job is rethrown here
/// after all workers stop.
void for_each_replica(std::int64_t replicas, int threads,
                      const std::function<void(std::int64_t)>& job);

}  // namespace gpaf
