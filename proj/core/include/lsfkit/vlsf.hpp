#pragma once

#include "lsfkit/detail/banding.hpp"
#include "lsfkit/hashing.hpp"
#include "lsfkit/ribbon.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lsfkit {

/// Growable bit string, bit i at word i/64, bit i%64.
class BitString {
public:
    BitString() = default;
    /// Parses a string of '0'/'1' characters.
    static BitString fromString(std::string_view bits);

    void push(bool bit) {
        if (size_ % 64 == 0)
            words_.push_back(0);
        if (bit)
            words_.back() |= uint64_t{1} << (size_ % 64);
        ++size_;
    }
    void append(bool bit, uint32_t count) {
        for (uint32_t i = 0; i < count; ++i)
            push(bit);
    }
    [[nodiscard]] bool operator[](size_t i) const noexcept { return (words_[i / 64] >> (i % 64)) & 1U; }
    [[nodiscard]] size_t size() const noexcept { return size_; }
    [[nodiscard]] bool empty() const noexcept { return size_ == 0; }
    void clear() noexcept {
        words_.clear();
        size_ = 0;
    }
    [[nodiscard]] std::string toString() const;

    friend bool operator==(const BitString &a, const BitString &b) = default;

private:
    std::vector<uint64_t> words_;
    size_t size_ = 0;
};

/// Filter pattern over {ONE, ANY}: bit i set means ONE (a stored fingerprint
/// bit), clear means ANY (nothing stored for that position).
struct BitPattern {
    BitString ones;

    static BitPattern fromString(std::string_view symbols); // '1' and '?'
    void appendOne(uint32_t count) { ones.append(true, count); }
    void appendAny(uint32_t count) { ones.append(false, count); }
    [[nodiscard]] size_t size() const noexcept { return ones.size(); }
};

class VlBurr;

/// Lazily evaluated bits of one query. Reading position L or beyond throws
/// StreamExhausted.
class BitStream {
public:
    [[nodiscard]] bool bit(uint32_t i) const;
    bool next() { return bit(pos_++); }
    /// Reads `count` bits and reports whether all of them were 1 (true for 0).
    bool readAllOnes(uint32_t count);

    [[nodiscard]] uint32_t position() const noexcept { return pos_; }
    [[nodiscard]] uint32_t length() const noexcept { return length_; }
    [[nodiscard]] uint32_t remaining() const noexcept { return length_ - pos_; }

private:
    friend class VlBurr;
    const detail::LayeredStore *store_ = nullptr;
    detail::LayeredStore::Resolved resolved_;
    KeyDigest digest_;
    uint32_t length_ = 0;
    uint32_t pos_ = 0;
    bool match_ = false;
};

/// Variable-length static function K -> {0,1}^* built from L interleaved
/// 1-bit ribbons. Bit j of a key's value goes to ribbon (b(k) + j) mod L at
/// the shared start position s(k); bumping thresholds are shared by all
/// ribbons of a layer.
class VlBurr {
public:
    VlBurr() = default;

    static VlBurr build(std::span<const std::pair<KeyDigest, BitString>> pairs,
                        const BuildConfig &cfg = {}, BuildLog *log = nullptr);

    /// Masked variant for aggregated weighted filters: ONE positions store the
    /// fingerprint bit g_j(k), ANY positions store nothing, free solution bits
    /// are pseudo-random. The structure has at least `minLength` ribbons so
    /// non-keys can be probed at that depth.
    static VlBurr buildFilter(std::span<const std::pair<KeyDigest, BitPattern>> patterns,
                              const BuildConfig &cfg = {}, BuildLog *log = nullptr, uint32_t minLength = 0);

    /// Raw stream; starts with f(k) for constructed keys.
    [[nodiscard]] BitStream queryStream(KeyDigest d) const;
    /// Match indicators XNOR(raw_j, g_j(d)); masked structures only.
    [[nodiscard]] BitStream queryFilterStream(KeyDigest d) const;

    [[nodiscard]] uint32_t ribbons() const noexcept { return length_; }
    [[nodiscard]] bool masked() const noexcept { return masked_; }
    [[nodiscard]] uint64_t storedBits() const noexcept { return storedBits_; }
    [[nodiscard]] int resolveLayer(KeyDigest d) const noexcept { return store_.resolve(d).layer; }
    [[nodiscard]] const detail::LayeredStore &store() const noexcept { return store_; }

    [[nodiscard]] uint64_t payloadBits() const noexcept { return store_.payloadBits(); }
    [[nodiscard]] uint64_t sizeInBits() const;

    [[nodiscard]] std::vector<std::byte> serialize() const;
    static VlBurr deserialize(std::span<const std::byte> bytes);
    void serializeTo(detail::ByteWriter &out) const;
    static VlBurr deserializeFrom(detail::ByteReader &in);

private:
    detail::LayeredStore store_;
    uint32_t length_ = 0;
    uint64_t storedBits_ = 0;
    bool masked_ = false;
};

} // namespace lsfkit
