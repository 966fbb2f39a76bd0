#pragma once

#include <cstdint>
#include <random>

namespace dfe {

using Rng = std::mt19937_64;

// splitmix64 finalizer; decorrelates seed streams derived from one master seed.
constexpr std::uint64_t split_mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return split_mix(master ^ split_mix(stream));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(master, a), b);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b,
                                    std::uint64_t c) {
    return derive_seed(derive_seed(master, a, b), c);
}

}  // namespace dfe
