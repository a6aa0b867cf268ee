#ifndef OFFLOAD_PARALLEL_HPP
#define OFFLOAD_PARALLEL_HPP

// Chunked index-range dispatch. Work items must be independent (each owns its
// RNG via a per-index derived seed); callers do any reductions afterwards by
// walking results in index order, which is what makes outputs bit-identical
// for every thread count.

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace offload {

inline void parallel_for_chunks(long long total, int threads,
                                const std::function<void(long long, long long)>& body) {
  if (total <= 0) return;
  threads = std::max(1, threads);
  const long long max_useful = total;
  const long long nthreads = std::min<long long>(threads, max_useful);
  if (nthreads == 1) {
    body(0, total);
    return;
  }
  const long long chunk = (total + nthreads - 1) / nthreads;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nthreads));
  for (long long t = 0; t < nthreads; ++t) {
    const long long begin = t * chunk;
    const long long end = std::min(total, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace offload

#endif  // OFFLOAD_PARALLEL_HPP
