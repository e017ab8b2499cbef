#pragma once

#include "lsfkit/detail/banding.hpp"
#include "lsfkit/hashing.hpp"

#include <bitset>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace lsfkit {

enum class InsertResult { Inserted, Redundant, Conflict };

/// Incrementally eliminated GF(2) ribbon system with m columns.
///
/// Each stored row sits at its pivot column j, with its lowest coefficient bit
/// set and its window spanning columns [j, j + w). At most one row is stored
/// per pivot column.
class RibbonSystem {
public:
    RibbonSystem() = default;
    RibbonSystem(uint64_t m, uint32_t w);

    /// Inserts the row with coefficient window `coeffs` starting at `start`.
    /// On Inserted, `*pivot` (if non-null) receives the column the reduced
    /// row ended up at.
    InsertResult insert(uint64_t start, uint64_t coeffs, bool rhs, uint64_t *pivot = nullptr);

    /// Removes the row stored at `pivot`. Only valid for the most recently
    /// inserted rows, since later rows may have been reduced against it.
    void retract(uint64_t pivot) noexcept { coeffs_[pivot] = 0; }

    /// Solution vector Z as ceil(m/64) words, bit j of Z at word j/64 bit j%64.
    /// Free columns are 0, or pseudo-random bits derived from `fillSeed`
    /// when `randomFill` is set.
    [[nodiscard]] std::vector<uint64_t> backSubstitute(bool randomFill = false,
                                                       uint64_t fillSeed = 0) const;

    [[nodiscard]] uint64_t columns() const noexcept { return m_; }
    [[nodiscard]] uint32_t width() const noexcept { return w_; }
    [[nodiscard]] bool occupied(uint64_t column) const noexcept { return coeffs_[column] != 0; }
    [[nodiscard]] uint64_t rowCount() const noexcept;

private:
    uint64_t m_ = 0;
    uint32_t w_ = 64;
    std::vector<uint64_t> coeffs_;
    std::vector<uint8_t> rhs_;
};

/// Reads the 64 solution bits starting at column `start`.
uint64_t solutionWindow(std::span<const uint64_t> z, uint64_t start) noexcept;

/// Dense bit matrix for the brute-force oracle (at most 256 columns).
struct BitMatrix {
    static constexpr size_t kMaxColumns = 256;
    size_t columns = 0;
    std::vector<std::bitset<kMaxColumns>> rows;
};

/// Full Gaussian elimination over GF(2). Returns some Z with H*Z = F, or
/// nullopt when the system is inconsistent. Z is returned as a bitset over
/// the columns.
std::optional<std::bitset<BitMatrix::kMaxColumns>> bruteForceSolveGF2(const BitMatrix &h,
                                                                      const std::vector<bool> &f);

/// Row rank of H over GF(2).
size_t gf2Rank(const BitMatrix &h);

struct BuildConfig {
    /// m is chosen as ceil(n / (1 + overload)), padded to whole buckets.
    double overload = 0.01;
    uint32_t maxLayers = 3;
    uint32_t bucketSize = 512;
    uint32_t width = 64;
    uint64_t fallbackCap = UINT64_MAX;
    uint64_t seed = 0x5eedb055ULL;
};

/// Per input key, the layer that stored it (-1 = fallback map).
using BuildLog = std::vector<int>;

/// 1-bit bumped ribbon retrieval: a static function K -> {0, 1}.
class BurrSf {
public:
    BurrSf() = default;

    static BurrSf build(std::span<const std::pair<KeyDigest, bool>> pairs,
                        const BuildConfig &cfg = {}, BuildLog *log = nullptr);

    [[nodiscard]] bool query(KeyDigest d) const noexcept;

    /// Layer index answering `d`, -1 for the fallback map, -2 if absent.
    [[nodiscard]] int resolveLayer(KeyDigest d) const noexcept;

    [[nodiscard]] size_t layerCount() const noexcept { return store_.layers.size(); }
    [[nodiscard]] size_t fallbackSize() const noexcept { return store_.fallbackDigests.size(); }
    [[nodiscard]] const detail::LayeredStore &store() const noexcept { return store_; }

    [[nodiscard]] uint64_t payloadBits() const noexcept { return store_.payloadBits(); }
    [[nodiscard]] uint64_t sizeInBits() const;

    [[nodiscard]] std::vector<std::byte> serialize() const;
    static BurrSf deserialize(std::span<const std::byte> bytes);
    void serializeTo(detail::ByteWriter &out) const;
    static BurrSf deserializeFrom(detail::ByteReader &in);

private:
    explicit BurrSf(detail::LayeredStore store) : store_(std::move(store)) {}
    detail::LayeredStore store_;
};

} // namespace lsfkit
