// Deterministic randomness.
//
// Every random decision in the project (splits, sampling, shuffling,
// initialization) flows through these helpers so that a single 64-bit seed
// reproduces results exactly, on any platform and in any reimplementation:
//
//   * generator: std::mt19937_64 seeded directly with the seed
//     (the standard fixes its output sequence bit-for-bit)
//   * uniform_index(g, n): g() % n
//   * unit_real(g): top 53 bits of g() scaled to [0, 1)
//   * shuffle: Fisher-Yates from the last element down, swapping position i
//     with position uniform_index(g, i + 1)
//
// std::shuffle and std::uniform_*_distribution are implementation-defined and
// must not be used anywhere results are persisted.
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace revdict {

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline std::uint64_t uniform_index(Rng& g, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    return g() % n;
}

inline double unit_real(Rng& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

template <class T>
void deterministic_shuffle(std::vector<T>& v, Rng& g) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_index(g, i + 1));
        using std::swap;
        swap(v[i], v[j]);
    }
}

}  // namespace revdict
