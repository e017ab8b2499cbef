#pragma once

#include "lsfkit/detail/binary_io.hpp"
#include "lsfkit/hashing.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace lsfkit::detail {

// Structure kinds shared by the LSF1 container header.
enum class StructureKind : uint8_t {
    Burr = 1,
    VlPlain = 2,
    VlMasked = 3,
    Lsf = 16,
    Csf = 17,
};

inline constexpr char kMagic[4] = {'L', 'S', 'F', '1'};
inline constexpr uint16_t kFormatVersion = 1;

// One key's equations: positions [0, length) of a bit string living at
// `bitOffset` in the arena. Position j is stored iff its mask bit is set.
struct BandingItem {
    KeyDigest digest;
    uint32_t length = 0;
    uint64_t bitOffset = 0;
};

struct BandingArena {
    std::vector<uint64_t> rhs;
    std::vector<uint64_t> mask;

    [[nodiscard]] bool rhsBit(uint64_t i) const noexcept { return (rhs[i / 64] >> (i % 64)) & 1U; }
    [[nodiscard]] bool stored(uint64_t i) const noexcept { return (mask[i / 64] >> (i % 64)) & 1U; }
    void resize(uint64_t bits) {
        rhs.assign((bits + 63) / 64, 0);
        mask.assign((bits + 63) / 64, 0);
    }
    void set(uint64_t i, bool isStored, bool value) noexcept {
        if (isStored)
            mask[i / 64] |= uint64_t{1} << (i % 64);
        if (value)
            rhs[i / 64] |= uint64_t{1} << (i % 64);
    }
};

struct BandingConfig {
    double overload = 0.01;
    uint32_t maxLayers = 3;
    uint32_t bucketSize = 512;
    uint32_t width = 64;
    bool randomFill = false;
    uint64_t fallbackCap = UINT64_MAX;
};

struct Layer {
    // Slots per ribbon including w-1 padding; 0 marks a layer without any
    // stored bit (every key reaching it resolves here and reads zeros).
    uint64_t m = 0;
    std::vector<uint16_t> thresholds;
    // Interleaved solution: word j of ribbon i lives at j * ribbons + i.
    std::vector<uint64_t> words;
};

// L interleaved bumped ribbons sharing start positions and thresholds, plus
// the explicit fallback for keys bumped out of every layer.
struct LayeredStore {
    uint64_t seed = 0;
    uint32_t width = 64;
    uint32_t bucketSize = 512;
    uint32_t ribbons = 1;
    std::vector<Layer> layers;
    std::vector<uint64_t> fallbackDigests; // sorted
    std::vector<uint64_t> fallbackWords;   // wordsPerEntry() per digest

    struct Resolved {
        int layer = -2; // >= 0 layer, -1 fallback, -2 absent
        uint64_t start = 0;
        uint64_t coeffs = 0;
        uint32_t firstRibbon = 0;
        size_t fallbackIndex = 0;
    };

    [[nodiscard]] static uint64_t layerSeed(uint64_t seed, size_t layer) noexcept {
        return remix(seed, 1000 + layer);
    }
    [[nodiscard]] RibbonParams layerParams(const Layer &layer) const noexcept;
    [[nodiscard]] uint64_t wordsPerRibbon(const Layer &layer) const noexcept { return (layer.m + 63) / 64; }
    [[nodiscard]] uint64_t wordsPerEntry() const noexcept { return (ribbons + 63) / 64; }

    [[nodiscard]] Resolved resolve(KeyDigest d) const noexcept;
    [[nodiscard]] bool rawBit(const Resolved &r, uint32_t position) const noexcept;

    // Flat word indices one stream read of all positions touches.
    [[nodiscard]] std::vector<uint64_t> touchedWords(const Resolved &r) const;

    // Solution words plus fallback payload words, in bits.
    [[nodiscard]] uint64_t payloadBits() const noexcept;

    void serialize(ByteWriter &out, StructureKind kind, uint64_t storedBits) const;
    // Returns the stored-bits field; checks magic/version/kind.
    static LayeredStore deserialize(ByteReader &in, StructureKind kind, uint64_t *storedBits);
};

// Builds the layered store. `placement`, if given, receives per item the
// layer index that stored it (-1 = fallback).
LayeredStore band(std::span<const BandingItem> items, const BandingArena &arena, uint32_t ribbons,
                  uint64_t seed, const BandingConfig &cfg, std::vector<int> *placement = nullptr);

} // namespace lsfkit::detail
