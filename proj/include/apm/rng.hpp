#pragma once

#include <cstdint>
#include <random>

namespace apm {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and up to two keys.
/// Streams keyed the same way are identical regardless of evaluation order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k1, std::uint64_t k2 = 0) {
    std::uint64_t s = master;
    splitmix64(s);
    s ^= 0x6a09e667f3bcc909ull + k1;
    splitmix64(s);
    s ^= 0xbb67ae8584caa73bull + k2;
    return splitmix64(s);
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t k1, std::uint64_t k2 = 0) {
    return std::mt19937_64(derive_seed(master, k1, k2));
}

/// Rademacher draw: +1 or -1 with equal probability.
inline double rademacher(std::mt19937_64& eng) {
    return (eng() & 1ull) ? 1.0 : -1.0;
}

}  // namespace apm
