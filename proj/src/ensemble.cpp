#include "gpaf/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gpaf {

int default_threads() {
  const unsigned h = std::thread::hardware_concurrency();
  return h == 0 ? 1 : static_cast<int>(h);
}

void for_each_replica(std::int64_t replicas, int threads,
                      const std::function<void(std::int64_t)>& job) {
  if (replicas <= 0) return;
  if (threads <= 0) threads = default_threads();
  const auto workers = static_cast<int>(std::min<std::int64_t>(threads, replicas));
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      if (stop.load()) return;
      const std::int64_t r = next.fetch_add(1);
      if (r >= replicas) return;
      try {
        job(r);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        stop = true;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace gpaf
