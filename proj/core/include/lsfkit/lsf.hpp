#pragma once

#include "lsfkit/coding.hpp"
#include "lsfkit/hashing.hpp"
#include "lsfkit/models.hpp"
#include "lsfkit/preprocess.hpp"
#include "lsfkit/ribbon.hpp"
#include "lsfkit/vlsf.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lsfkit {

inline constexpr uint64_t kDefaultMasterSeed = 0x15f15f15f15f15f1ULL;

/// Seeds of the two VL structures, derived from the master seed.
inline constexpr uint64_t filterSeed(uint64_t master) noexcept { return remix(master, 101); }
inline constexpr uint64_t correctionSeed(uint64_t master) noexcept { return remix(master, 102); }

/// Filter length for a decision whose less probable branch has probability p.
/// With randomized rounding the real-valued optimum is rounded up with
/// probability equal to its fractional part, driven by `coin` in [0, 1).
uint32_t filterLength(double p, bool randomized = false, double coin = 0.0) noexcept;

/// Weighted relative membership: answers x in M exactly for x in X.
class Wrm {
public:
    Wrm() = default;

    /// `member[i]` says whether keys[i] is in M; weights are p(x) in [0, 1/2].
    static Wrm build(std::span<const KeyDigest> keys, std::span<const char> member, std::span<const double> weights,
                     const BuildConfig &cfg = {});

    [[nodiscard]] bool query(KeyDigest d, double weight) const;

    [[nodiscard]] const VlBurr &filter() const noexcept { return filter_; }
    [[nodiscard]] const BurrSf &correction() const noexcept { return correction_; }
    /// Keys of X whose filter probe matched (true and false positives).
    [[nodiscard]] uint64_t filterPositives() const noexcept { return positives_; }
    [[nodiscard]] uint64_t payloadBits() const noexcept { return filter_.payloadBits() + correction_.payloadBits(); }
    [[nodiscard]] uint64_t sizeInBits() const { return filter_.sizeInBits() + correction_.sizeInBits(); }

private:
    bool filterMatch(KeyDigest d, uint32_t r) const;

    VlBurr filter_;
    BurrSf correction_;
    uint64_t positives_ = 0;
};

enum class LsfMode : uint8_t { Learned = 0, Csf = 1 };

struct LsfConfig {
    uint64_t seed = kDefaultMasterSeed;
    BuildConfig ribbon;
    /// Randomized rounding of filter lengths; off by default.
    bool randomizedRounding = false;
};

struct SpaceLedger {
    uint64_t keys = 0;
    uint64_t modelBits = 0;
    uint64_t filterPayloadBits = 0;
    uint64_t correctionPayloadBits = 0;
    uint64_t metadataBits = 0;
    uint64_t totalBits = 0;
    double surprisalBits = 0;
    double sigmaBits = 0;

    [[nodiscard]] uint64_t payloadBits() const noexcept { return filterPayloadBits + correctionPayloadBits; }
    [[nodiscard]] bool overheadDefined() const noexcept { return surprisalBits > 0; }
    /// (total - model) / surprisal; NaN when surprisal is zero.
    [[nodiscard]] double overheadRatio() const noexcept;
    [[nodiscard]] double perKey(double bits) const noexcept {
        return keys ? bits / static_cast<double>(keys) : 0.0;
    }
};

struct QueryOptions {
    /// Build the full code book even when the most likely value has p > 1/2.
    bool forceSlowPath = false;
};

struct QueryStats {
    uint64_t queries = 0;
    uint64_t fastPath = 0; // answered without building a code book
    uint64_t codeBooks = 0;
};

/// Learned static function: model, filter VL structure, correction VL
/// structure and value table. query(k) = f(k) for every constructed key.
class Lsf {
public:
    Lsf() = default;

    /// `model` is stored at 16-bit precision and the rounded model is the one
    /// used for construction. `features` rows align with `keys`.
    static Lsf build(std::span<const std::string> keys, const FeatureMatrix &features,
                     std::span<const uint32_t> labels, std::vector<std::string> valueNames,
                     const ProbabilityModel &model, Preprocessor prep = {}, const LsfConfig &cfg = {});

    /// Compressed static function: frequency model and one global Huffman code.
    static Lsf buildCsf(std::span<const std::string> keys, std::span<const uint32_t> labels,
                        std::vector<std::string> valueNames, const LsfConfig &cfg = {});

    /// Value index of `key`; arbitrary (but no error) for non-keys.
    [[nodiscard]] uint32_t query(std::string_view key, std::span<const double> features,
                                 const QueryOptions &opt = {}, QueryStats *stats = nullptr) const;
    [[nodiscard]] const std::string &valueName(uint32_t index) const { return valueNames_.at(index); }

    [[nodiscard]] LsfMode mode() const noexcept { return mode_; }
    [[nodiscard]] uint64_t size() const noexcept { return n_; }
    [[nodiscard]] uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] uint32_t classes() const noexcept { return static_cast<uint32_t>(valueNames_.size()); }
    [[nodiscard]] uint32_t maxFilterLength() const noexcept { return fMax_; }
    [[nodiscard]] uint32_t maxCorrectionLength() const noexcept { return cMax_; }
    [[nodiscard]] bool randomizedRounding() const noexcept { return randomizedRounding_; }
    [[nodiscard]] const ProbabilityModel &model() const noexcept { return model_; }
    [[nodiscard]] const Preprocessor &preprocessor() const noexcept { return prep_; }
    [[nodiscard]] const std::vector<std::string> &valueNames() const noexcept { return valueNames_; }
    [[nodiscard]] const VlBurr &filter() const noexcept { return filter_; }
    [[nodiscard]] const VlBurr &correction() const noexcept { return correction_; }
    [[nodiscard]] const CodeBook &globalCode() const noexcept { return globalCode_; }

    [[nodiscard]] SpaceLedger ledger() const;

    [[nodiscard]] std::vector<std::byte> serialize() const;
    static Lsf deserialize(std::span<const std::byte> bytes);

private:
    struct Walker;

    static Lsf assemble(std::span<const std::string> keys, const FeatureMatrix &features,
                        std::span<const uint32_t> labels, Lsf shell, const LsfConfig &cfg);
    [[nodiscard]] Distribution distributionFor(std::span<const double> features) const;

    LsfMode mode_ = LsfMode::Learned;
    uint64_t seed_ = kDefaultMasterSeed;
    uint64_t n_ = 0;
    uint32_t fMax_ = 0;
    uint32_t cMax_ = 0;
    bool randomizedRounding_ = false;
    double surprisalBits_ = 0;
    ProbabilityModel model_;
    Preprocessor prep_;
    std::vector<std::string> valueNames_;
    VlBurr filter_;
    VlBurr correction_;
    CodeBook globalCode_;
};

} // namespace lsfkit
