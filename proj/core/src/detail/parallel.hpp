#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace lexalign::detail {

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(begin, end) over contiguous chunks of [0, n). Chunks are fixed by
// (n, chunk) alone, so every output slot is written by exactly one invocation
// and results do not depend on the worker count.
inline void parallel_chunks(Eigen::Index n, Eigen::Index chunk, int threads,
                            const std::function<void(Eigen::Index, Eigen::Index)>& fn) {
  if (n <= 0) return;
  chunk = std::max<Eigen::Index>(1, chunk);
  const Eigen::Index n_chunks = (n + chunk - 1) / chunk;
  const int workers =
      static_cast<int>(std::min<Eigen::Index>(resolve_threads(threads), n_chunks));
  if (workers <= 1) {
    for (Eigen::Index c = 0; c < n_chunks; ++c) {
      fn(c * chunk, std::min(n, (c + 1) * chunk));
    }
    return;
  }
  std::atomic<Eigen::Index> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const Eigen::Index c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        fn(c * chunk, std::min(n, (c + 1) * chunk));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace lexalign::detail
