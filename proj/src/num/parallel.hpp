#pragma once

#include <cstddef>
#include <functional>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace dish::num {

/// Runs fn(i) for i in [0, n), parallel across OpenMP threads when
/// threads != 1. threads == 1 is the serial reference path (no omp region);
/// threads == 0 uses the OpenMP default team size.
///
/// Results must not depend on the team size: callers give each index its own
/// RNG stream and reduce through fixed-order buffers, never shared state.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
#if defined(_OPENMP)
  if (threads > 1) {
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      fn(static_cast<std::size_t>(i));
  } else {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      fn(static_cast<std::size_t>(i));
  }
#else
  for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

/// Deterministic blocked reduction: splits [0, n) into fixed-size blocks,
/// processes blocks in parallel, then combines per-block results serially
/// in block order. The block partition never depends on the thread count,
/// so floating-point sums are identical for any team size.
///
/// block_fn(block_index, begin, end) fills slot block_index;
/// combine(block_index) folds slots in ascending order.
template <typename BlockFn, typename CombineFn>
void blocked_reduce(std::size_t n, std::size_t block_size, int threads,
                    BlockFn&& block_fn, CombineFn&& combine) {
  if (block_size == 0) block_size = 1;
  const std::size_t n_blocks = (n + block_size - 1) / block_size;
  parallel_for(n_blocks, threads, [&](std::size_t b) {
    const std::size_t begin = b * block_size;
    const std::size_t end = begin + block_size < n ? begin + block_size : n;
    block_fn(b, begin, end);
  });
  for (std::size_t b = 0; b < n_blocks; ++b) combine(b);
}

}  // namespace dish::num
