#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace lsfkit {

/// Smallest probability any value may receive; caps Shannon code lengths at 32.
inline constexpr double kProbabilityFloor = 0x1p-32;
inline constexpr uint32_t kMaxShannonLength = 32;

/// Probability distribution over value indices 0..|V|-1.
class Distribution {
public:
    Distribution() = default;

    [[nodiscard]] size_t size() const noexcept { return probs_.size(); }
    [[nodiscard]] double operator[](size_t v) const noexcept { return probs_[v]; }
    [[nodiscard]] std::span<const double> probs() const noexcept { return probs_; }

private:
    friend Distribution clampNormalize(std::span<const double> raw);
    explicit Distribution(std::vector<double> p) : probs_(std::move(p)) {}
    std::vector<double> probs_;
};

/// Floors entries at kProbabilityFloor and rescales the remaining mass so the
/// result sums to 1. Throws AllZero if no entry is positive.
Distribution clampNormalize(std::span<const double> raw);

/// ceil(-log2 p), read off the binary exponent; at least 1 when the alphabet
/// has more than one value, at most kMaxShannonLength.
uint32_t shannonLength(double p, size_t alphabetSize = 2) noexcept;

struct CodeEntry {
    uint32_t value = 0;
    double prob = 0;
    uint32_t length = 0;
    uint64_t codeword = 0; // `length` bits, most significant first
};

/// Prefix code whose entries are the leaves of the canonical code tree,
/// ordered by (length, value index).
class CodeBook {
public:
    CodeBook() = default;
    explicit CodeBook(std::vector<CodeEntry> entries) : entries_(std::move(entries)) {}

    [[nodiscard]] size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] const CodeEntry &operator[](size_t i) const noexcept { return entries_[i]; }
    [[nodiscard]] std::span<const CodeEntry> entries() const noexcept { return entries_; }

    /// Leaf position of `value`, or size() if absent.
    [[nodiscard]] size_t leafOf(uint32_t value) const noexcept;
    [[nodiscard]] double expectedLength() const noexcept;
    [[nodiscard]] double kraftSum() const noexcept;
    [[nodiscard]] bool prefixFree() const noexcept;

    /// Bit `depth` of leaf i's codeword (0 = first bit).
    [[nodiscard]] bool bitAt(size_t leaf, uint32_t depth) const noexcept {
        const CodeEntry &e = entries_[leaf];
        return (e.codeword >> (e.length - 1 - depth)) & 1U;
    }

private:
    std::vector<CodeEntry> entries_;
};

CodeBook shannonAssign(const Distribution &dist);
CodeBook huffmanAssign(const Distribution &dist);

/// Node of the implicit code tree: depth plus leaf range [first, last].
struct TreeCursor {
    uint32_t depth = 0;
    size_t first = 0;
    size_t last = 0;
    double mass = 1.0;

    static TreeCursor root(const CodeBook &book) noexcept {
        return {0, 0, book.size() == 0 ? 0 : book.size() - 1, 1.0};
    }
    [[nodiscard]] bool isLeaf(const CodeBook &book) const noexcept {
        return first == last && book[first].length == depth;
    }
};

struct Split {
    size_t split = 0;     // first leaf on the 1-branch (last + 1 if none)
    double pLeft = 0;
    double pRight = 0;
    bool hasLeft = false;
    bool hasRight = false;
    TreeCursor left;
    TreeCursor right;
};

/// One step down the implicit tree by a linear scan of the cursor's range.
/// Throws NotInner on a leaf.
Split descend(const TreeCursor &cursor, const CodeBook &book);

/// space(p, r) = p*r + p + (1-p)*2^-r: expected bits per element of a
/// filter-plus-correction encoding of one skewed binary decision.
double spaceCost(double p, double r) noexcept;

/// argmin over r in {0..64} of spaceCost(p, r), ties to the smaller r.
uint32_t optimalBitLength(double p) noexcept;

/// Stationary point of spaceCost over real r >= 0.
double optimalRealBitLength(double p) noexcept;

double binaryEntropy(double p) noexcept;

/// Entropy in bits of a distribution.
double entropy(std::span<const double> probs) noexcept;

} // namespace lsfkit
