#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sau {

// FNV-1a, 64-bit. Used for checkpoint content hashes and plan/mask pairing.
// Not cryptographic; chosen so alternate implementations of the file format
// can reproduce it from this definition alone.
inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<std::uint64_t>(p[i]);
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = kFnvOffset) {
    return fnv1a64(s.data(), s.size(), h);
}

// Canonical byte form of a u64: little-endian, independent of host order.
inline void append_u64_le(std::vector<unsigned char>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
}

inline std::uint64_t hash_u64(std::uint64_t v, std::uint64_t h = kFnvOffset) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    return fnv1a64(b, 8, h);
}

inline std::uint64_t hash_f64(double d, std::uint64_t h = kFnvOffset) {
    return hash_u64(std::bit_cast<std::uint64_t>(d), h);
}

inline std::uint64_t hash_f64_span(std::span<const double> xs, std::uint64_t h = kFnvOffset) {
    for (double d : xs) {
        h = hash_f64(d, h);
    }
    return h;
}

}  // namespace sau
