#pragma once

#include <cstdint>
#include <string_view>

namespace mosaic {

// SplitMix64. Small, fast, and fully specified, so streams are identical on
// every platform regardless of the standard library (std::normal_distribution
// and friends are not portable across implementations).
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in [0, n). Lemire's multiply-shift; bias is negligible for the
    // n used here and the result is platform-stable.
    uint64_t next_below(uint64_t n) {
        return static_cast<uint64_t>(
            (static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    // Uniform in [lo, hi).
    double next_range(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

private:
    uint64_t state_;
};

inline uint64_t mix_u64(uint64_t h, uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    return h;
}

// FNV-1a over bytes; used for seed derivation and feature hashing.
inline uint64_t fnv1a(std::string_view bytes, uint64_t seed = 0xcbf29ce484222325ULL) {
    uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Derives a child seed from a parent seed and a label, so independent
// pipeline stages draw from unrelated streams.
inline uint64_t derive_seed(uint64_t seed, std::string_view label) {
    return mix_u64(seed, fnv1a(label));
}

inline uint64_t derive_seed(uint64_t seed, uint64_t v) {
    return mix_u64(seed, v);
}

}  // namespace mosaic
