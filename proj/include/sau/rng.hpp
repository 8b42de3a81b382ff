#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

#include "sau/hash.hpp"

namespace sau {

// Deterministic PRNG shared by every randomized component, defined precisely
// enough that another implementation of the same file formats can reproduce
// streams bit for bit.
//
// Seeding: state = splitmix64(seed), where splitmix64 is
//     z  = seed + 0x9E3779B97F4A7C15
//     z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
//     z ^= z >> 27;  z *= 0x94D049BB133111EB
//     z ^= z >> 31
// If the result is zero the state is replaced by 0x9E3779B97F4A7C15.
//
// State transition (xorshift64*):
//     x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27
//     output = x * 0x2545F4914F6CDD1D
//
// Uniform double: u = ((output >> 11) + 1) * 2^-53, in (0, 1].
// Normal variates: Box-Muller on two consecutive uniforms u1, u2:
//     r = sqrt(-2 ln u1),  z0 = r cos(2 pi u2),  z1 = r sin(2 pi u2)
// z0 is returned first, z1 on the next call.
// Shuffle: Fisher-Yates, i from n-1 down to 1, j = index(i + 1).
inline std::uint64_t splitmix64(std::uint64_t x) {
    std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {
        if (state_ == 0) {
            state_ = 0x9E3779B97F4A7C15ULL;
        }
    }

    std::uint64_t next_u64() {
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545F4914F6CDD1DULL;
    }

    // Uniform in (0, 1].
    double next_u01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    double next_normal(double stddev = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_ * stddev;
        }
        const double u1 = next_u01();
        const double u2 = next_u01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a) * stddev;
    }

    // Uniform index in [0, n). n must be positive.
    std::int64_t next_index(std::int64_t n) {
        auto k = static_cast<std::int64_t>(next_u01() * static_cast<double>(n));
        return k >= n ? n - 1 : k;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::int64_t i = static_cast<std::int64_t>(v.size()) - 1; i >= 1; --i) {
            std::swap(v[static_cast<std::size_t>(i)],
                      v[static_cast<std::size_t>(next_index(i + 1))]);
        }
    }

    // Named substream derivation, e.g. per sweep cell: hash the parent seed
    // with a canonical tag string.
    static std::uint64_t derive(std::uint64_t seed, std::string_view tag) {
        return fnv1a64(tag, hash_u64(seed));
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sau
