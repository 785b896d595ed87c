#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace recurmix {

// Worker cap: RECURMIX_THREADS env var, where 0 or unset means one worker
// per hardware thread.
std::size_t worker_count();

// Runs fn(begin, end) over [0, n) split into chunks across workers.
// Chunks write to disjoint state; no reduction happens here.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

// Fixed-size blocks, combined in block order, so the result is identical
// for every worker count. block fn computes the partial for [begin, end).
double block_sum(std::size_t n, const std::function<double(std::size_t, std::size_t)>& fn);

// Same scheme for vector-valued partials of dimension dim; partials are
// accumulated into out (assumed zero-initialized, length dim) in block order.
void block_sum_vec(std::size_t n, std::size_t dim,
                   const std::function<void(std::size_t, std::size_t, double*)>& fn,
                   double* out);

inline constexpr std::size_t kReductionBlock = 64;

}  // namespace recurmix
