#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace recurmix {

// splitmix64 finalizer, used to derive independent seed streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Deterministic per-stream seed from a base seed and up to two stream
// indices (subject, restart, replication, K, ...). Cohorts and fits are
// reproducible regardless of execution order because every unit of work
// gets its own derived stream.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(splitmix64(base) ^ (a + 0x632BE59BD9B4E019ULL)) ^
                      (b + 0x9E3779B97F4A7C15ULL));
}

// Seedable 64-bit generator with explicitly coded transforms so that a
// given seed yields the same draws on every standard library. mt19937_64
// itself is fully specified; the distributions in <random> are not, so we
// avoid them.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on the open interval (0,1); never returns 0 or 1.
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    // Exponential(1) by inversion.
    double exponential() { return -std::log(uniform()); }

    // Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform index in [0, n) by 128-bit multiply-shift.
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<__uint128_t>(gen_()) * static_cast<__uint128_t>(n)) >> 64);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace recurmix
