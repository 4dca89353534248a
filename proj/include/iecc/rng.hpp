#pragma once

#include <cstdint>
#include <random>

namespace iecc::rng {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline Engine make_engine(std::uint64_t seed) {
    return Engine(splitmix64(seed));
}

// Seed for an independent stream (restart index, run index, ...).
inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

// Unbiased draw from [0, n). std::uniform_int_distribution is
// implementation-defined, so outputs would not be reproducible across
// standard libraries; this rejection sampler is.
inline std::size_t uniform_index(Engine& eng, std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = eng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

} // namespace iecc::rng
