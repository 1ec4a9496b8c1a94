#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace huberlr {

/// Worker count: SPECTRAL_HUBER_THREADS if set and positive, otherwise the
/// hardware concurrency.
int thread_count();

/// Runs fn(i) for i in [0, n). Indices are split into contiguous blocks, one
/// per worker; the first exception thrown by any worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

enum class Reduction {
  Sequential,  // fixed index order
  Pairwise,    // balanced tree over the same fixed order
};

double reduce_sum(const std::vector<double>& terms, Reduction mode);

}  // namespace huberlr
