#include "recurmix/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

namespace recurmix {

std::size_t worker_count() {
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const char* env = std::getenv("RECURMIX_THREADS");
    if (env == nullptr || *env == '\0') return hw;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || v < 0) return hw;
    if (v == 0) return hw;
    return static_cast<std::size_t>(v);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t workers = std::min(worker_count(), n);
    if (workers <= 1 || n < 2 * kReductionBlock) {
        fn(0, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        if (begin >= n) break;
        const std::size_t end = std::min(begin + chunk, n);
        pool.emplace_back([&fn, &errors, w, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
}

double block_sum(std::size_t n, const std::function<double(std::size_t, std::size_t)>& fn) {
    if (n == 0) return 0.0;
    const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(nblocks, 0.0);
    parallel_for(nblocks, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
            const std::size_t begin = b * kReductionBlock;
            const std::size_t end = std::min(begin + kReductionBlock, n);
            partial[b] = fn(begin, end);
        }
    });
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

void block_sum_vec(std::size_t n, std::size_t dim,
                   const std::function<void(std::size_t, std::size_t, double*)>& fn,
                   double* out) {
    if (n == 0) return;
    const std::size_t nblocks = (n + kReductionBlock - 1) / kReductionBlock;
    std::vector<double> partial(nblocks * dim, 0.0);
    parallel_for(nblocks, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
            const std::size_t begin = b * kReductionBlock;
            const std::size_t end = std::min(begin + kReductionBlock, n);
            fn(begin, end, partial.data() + b * dim);
        }
    });
    for (std::size_t b = 0; b < nblocks; ++b)
        for (std::size_t j = 0; j < dim; ++j) out[j] += partial[b * dim + j];
}

}  // namespace recurmix
