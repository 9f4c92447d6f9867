#pragma once

#include <cstdint>

namespace rowpip {

// Portable 64-bit generator: xoshiro256** seeded through splitmix64.
// Both recurrences are fixed here so identical seeds reproduce the same
// streams on any platform or implementation language:
//
//   splitmix64:  z  = (x += 0x9E3779B97F4A7C15)
//                z  = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//                z  = (z ^ (z >> 27)) * 0x94D049BB133111EB
//                out = z ^ (z >> 31)
//
//   xoshiro256** state s[0..3] = first four splitmix64 outputs; each step:
//                out  = rotl(s[1] * 5, 7) * 9
//                t    = s[1] << 17
//                s[2] ^= s[0]; s[3] ^= s[1]; s[1] ^= s[2]; s[0] ^= s[3]
//                s[2] ^= t;   s[3] = rotl(s[3], 45)
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : s_) word = splitmix64(x);
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform double in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform integer in [0, n) via rejection-free modulo of the top bits;
    // bias is < 2^-32 for any n below 2^32, which is fine for placement jitter.
    std::uint64_t next_below(std::uint64_t n) {
        return n ? next() % n : 0;
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }

    std::uint64_t s_[4];
};

}  // namespace rowpip
