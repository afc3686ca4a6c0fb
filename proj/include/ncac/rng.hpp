#pragma once

#include <cstdint>
#include <random>

namespace ncac {

// splitmix64: used to derive independent sub-stream seeds (per trial, per
// worker) from one user-facing seed without correlated low bits.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed + 0x6a09e667f3bcc909ull * (stream + 1);
    return splitmix64(s);
}

// Canonical double in [0, 1): top 53 bits of one engine draw. Used instead of
// std::uniform_real_distribution so sampled values are identical across
// standard library implementations.
inline double canonical_double(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace ncac
