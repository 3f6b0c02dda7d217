#include "stretto/loss.hpp"

#include "stretto/rng.hpp"

#include <algorithm>
#include <atomic>
#include <iostream>

namespace stretto {

namespace {
std::atomic<std::uint64_t> g_zero_norms{0};
}

std::uint64_t zero_norm_count() { return g_zero_norms.load(); }

void note_zero_norm() {
  if (g_zero_norms.fetch_add(1) == 0)
    std::cerr << "[stretto] warning: zero-norm embedding, using d=1 convention\n";
}

NegativeLists sample_negatives(int batch, int k, Rng& rng) {
  if (batch < 2) throw ArgumentError("need at least two pairs for negatives");
  if (k < 1 || k > batch - 1)
    throw ArgumentError("negatives per anchor must be in [1, batch-1]");
  NegativeLists lists(static_cast<std::size_t>(batch));
  std::vector<int> pool;
  for (int i = 0; i < batch; ++i) {
    pool.clear();
    for (int j = 0; j < batch; ++j)
      if (j != i) pool.push_back(j);
    // partial Fisher-Yates draw of k entries
    for (int j = 0; j < k; ++j) {
      int pick = static_cast<int>(
          rng.uniform_int(j, static_cast<std::int64_t>(pool.size()) - 1));
      std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick)]);
    }
    lists[static_cast<std::size_t>(i)].assign(pool.begin(), pool.begin() + k);
  }
  return lists;
}

}  // namespace stretto
