#pragma once

#include <functional>

namespace lmke {

/// Hardware concurrency, with `requested` taking precedence when positive.
int resolve_threads(int requested);

/// Runs fn(begin, end, tid) over contiguous chunks of [0, n). The partition
/// depends only on (n, threads), so reductions that sum per-thread buffers
/// in tid order are reproducible for a fixed thread count.
void parallel_chunks(int n, int threads, const std::function<void(int, int, int)>& fn);

}  // namespace lmke
