#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace lsfkit {

/// 64-bit hashed identity of a key. Every per-key quantity used by the
/// retrieval structures (start position, coefficients, ribbon offset,
/// fingerprint bits) is a pure function of this value and a salt.
struct KeyDigest {
    uint64_t value = 0;

    friend constexpr bool operator==(KeyDigest, KeyDigest) = default;
    friend constexpr auto operator<=>(KeyDigest, KeyDigest) = default;
};

inline constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr uint64_t kFnvPrime = 0x100000001b3ULL;
inline constexpr uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// xor-shift-multiply avalanche (the splitmix64 output function).
constexpr uint64_t finalize(uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

constexpr uint64_t remix(uint64_t d, uint64_t salt) noexcept {
    return finalize(d ^ (kGoldenGamma * salt));
}

KeyDigest digest(std::span<const std::byte> keyBytes, uint64_t seed) noexcept;
KeyDigest digest(std::string_view key, uint64_t seed) noexcept;

/// Geometry of one ribbon layer. `m` counts all slots including the w-1
/// padding slots, so start positions range over [0, m - w].
struct RibbonParams {
    uint64_t m = 64;
    uint32_t w = 64;
    uint32_t bucketSize = 512;
    uint32_t ribbons = 1;

    [[nodiscard]] uint64_t numStarts() const noexcept { return m - w + 1; }
    [[nodiscard]] bool valid() const noexcept;
};

struct RibbonParts {
    uint64_t start = 0;
    uint64_t coeffs = 0;
    uint64_t bucket = 0;
    uint32_t offset = 0;
};

/// Maps a full 64-bit value onto [0, range) without modulo bias.
constexpr uint64_t rangeMap(uint64_t x, uint64_t range) noexcept {
    __extension__ using u128 = unsigned __int128;
    return static_cast<uint64_t>((static_cast<u128>(x) * range) >> 64);
}

RibbonParts deriveParts(KeyDigest d, const RibbonParams &params) noexcept;

/// First ribbon of a key's cyclic run, in [0, ribbons).
uint32_t ribbonOffset(KeyDigest d, uint32_t ribbons) noexcept;

/// Word `index` of the lazily generated fingerprint sequence g(d).
constexpr uint64_t fingerprintWord(KeyDigest d, uint64_t index) noexcept {
    return remix(d.value, 16 + index);
}

constexpr bool fingerprintBit(KeyDigest d, uint64_t i) noexcept {
    return (fingerprintWord(d, i / 64) >> (i % 64)) & 1U;
}

/// Per-layer rehash so that bumped keys see fresh positions in the next layer.
constexpr KeyDigest layerDigest(KeyDigest d, uint64_t layerSeed) noexcept {
    return KeyDigest{remix(d.value ^ layerSeed, 7)};
}

} // namespace lsfkit
