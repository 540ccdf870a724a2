#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace convmem {

/// Hex-encoded SHA-256 digest (lowercase). Backed by OpenSSL.
std::string sha256_hex(std::string_view data);

/// 64-bit FNV-1a over raw bytes. Stable across platforms.
constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

/// splitmix64 step; the output is both the next state and the draw.
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Deterministic RNG used wherever reproducibility across platforms matters
/// (mock embeddings, synthetic data). std:: distributions are not portable,
/// so everything is derived from splitmix64 draws.
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [-1, 1).
    double next_signed() { return 2.0 * next_double() - 1.0; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
};

} // namespace convmem
