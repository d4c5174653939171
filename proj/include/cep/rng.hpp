#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cep {

/// Derives an independent stream seed from a root seed, a purpose name and an
/// optional index (fold, epoch, ...). splitmix64 over an FNV-1a hash of the name.
inline std::uint64_t sub_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    std::uint64_t z = root ^ h ^ (index * 0x9e3779b97f4a7c15ull);
    for (int i = 0; i < 2; ++i) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z ^= z >> 31;
    }
    return z;
}

using Rng = std::mt19937_64;

/// Uniform index in [0, n) without relying on the implementation-defined
/// std::uniform_int_distribution algorithm.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return static_cast<std::size_t>(x % n);
}

/// Uniform real in [0, 1) from the top 53 bits.
inline double uniform_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Fisher-Yates with uniform_index, so orders are stable across standard libraries.
template <class It>
void seeded_shuffle(It first, It last, Rng& rng) {
    const auto n = static_cast<std::size_t>(last - first);
    for (std::size_t i = n; i > 1; --i) std::swap(first[i - 1], first[uniform_index(rng, i)]);
}

}  // namespace cep
