#pragma once

#include <cstdint>
#include <random>

#include "apnc/common.hpp"

namespace apnc {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Distinct deterministic stream per (seed, trial); trials may run in any
/// order or in parallel without affecting results.
inline uint64_t stream_seed(uint64_t seed, uint64_t trial) {
    return splitmix64(splitmix64(seed) ^ splitmix64(trial + 0x2545f4914f6cdd1dULL));
}

inline std::mt19937_64 make_rng(uint64_t seed) { return std::mt19937_64(seed); }

inline cplx draw_cn(std::mt19937_64& rng, double complex_variance) {
    std::normal_distribution<double> n(0.0, std::sqrt(complex_variance / 2.0));
    return {n(rng), n(rng)};
}

}  // namespace apnc
