#ifndef STRETTO_PARALLEL_HPP
#define STRETTO_PARALLEL_HPP

#include "stretto/common.hpp"

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace stretto {

// Runs fn(i, worker) for i in [0, n). Workers pull indices from a shared
// counter; callers must write only to per-index (or per-worker) buffers and
// do any cross-index reduction afterwards in index order, so results never
// depend on the thread count.
inline void parallel_for(int n, const std::function<void(int, int)>& fn) {
  int workers = std::min(num_threads(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          if (failed.load()) return;
          fn(i, w);
        }
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed.load() && error) std::rethrow_exception(error);
}

}  // namespace stretto

#endif
