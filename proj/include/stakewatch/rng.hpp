#pragma once

#include <cstdint>
#include <string_view>

#include "stakewatch/mathutil.hpp"

namespace stakewatch {

// FNV-1a, used for manifests and for deriving independent RNG streams from
// string ids. Not cryptographic.
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Deterministic counter-based generator. Streams derived from a root seed and
// a string/int key are independent for practical purposes, which lets each
// match (and each scored minute) own its own stream regardless of the order
// or thread in which it is processed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // Warm up so that small seeds do not produce correlated openings.
        splitmix64(state_);
        splitmix64(state_);
    }

    static Rng stream(std::uint64_t seed, std::string_view key, std::uint64_t index = 0) {
        std::uint64_t h = fnv1a64(key, seed ^ 0x9e3779b97f4a7c15ull);
        h ^= index * 0xd1b54a32d192ed03ull;
        return Rng(h);
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform on (0,1): 53-bit mantissa, never returns 0 or 1.
    double uniform01() {
        const std::uint64_t bits = next_u64() >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double normal(double mean = 0.0, double sd = 1.0) {
        return mean + sd * norm_quantile(uniform01());
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
};

} // namespace stakewatch
