#pragma once

#include <cstdint>
#include <random>

namespace bivirus {

/// Engine used everywhere randomness is needed: std::mt19937_64 produces an
/// identical stream for a given seed on every conforming platform.
using Rng = std::mt19937_64;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Independent per-task stream: the engine for task `index` under `seed` is
/// seeded with splitmix64(seed ^ splitmix64(index)), so tasks can run in any
/// order (or concurrently) and still see identical draws.
inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(detail::splitmix64(seed ^ detail::splitmix64(index)));
}

}  // namespace bivirus
