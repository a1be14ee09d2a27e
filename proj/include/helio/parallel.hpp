#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace helio {

/// Worker count: HELIO_THREADS if set and positive, else hardware concurrency.
std::size_t thread_count();

/// Runs fn(begin, end) over contiguous chunks of [0, n). Each index is visited
/// exactly once; chunk boundaries never affect results written per index.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

/// Pairwise (tree) summation. Result depends only on the values and their
/// order, never on the thread count.
double pairwise_sum(std::span<const double> values);

}  // namespace helio
