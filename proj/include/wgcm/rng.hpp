#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "wgcm/normal.hpp"

namespace wgcm {

// SplitMix64 output mixing; used as the published seed-derivation function.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Labeled/counter substream derivation: mix64 over seed and salt. Chain calls
// for multi-part labels, e.g. derive_seed(derive_seed(s, "rep"), index).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    return mix64(seed + 0x9e3779b97f4a7c15ULL * (salt + 1));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    return derive_seed(seed, fnv1a(label));
}

// Deterministic random stream. The engine (mt19937_64) and every transform on
// top of it are fixed by this project so that one seed reproduces bit-identical
// streams on any platform: uniforms come from the top 53 bits, normals through
// the inverse CDF, bounded integers by rejection sampling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    // Uniform on the open interval (0, 1).
    double uniform01() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return normal_quantile(uniform01()); }

    // Unbiased integer in [0, m), m >= 1.
    std::uint64_t bounded(std::uint64_t m) {
        const std::uint64_t threshold = (-m) % m;
        for (;;) {
            const std::uint64_t r = engine_();
            if (r >= threshold) return r % m;
        }
    }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(values[i - 1], values[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace wgcm
