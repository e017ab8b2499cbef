#include "lsfkit/ribbon.hpp"

#include <algorithm>
#include <bit>
#include <cassert>

namespace lsfkit {

RibbonSystem::RibbonSystem(uint64_t m, uint32_t w)
    : m_(m), w_(w), coeffs_(m, 0), rhs_(m, 0) {
    assert(w >= 1 && w <= 64 && m >= w);
}

InsertResult RibbonSystem::insert(uint64_t start, uint64_t coeffs, bool rhs, uint64_t *pivot) {
    assert(start + w_ <= m_);
    assert(coeffs & 1U);
    uint64_t col = start;
    uint64_t c = coeffs;
    uint8_t r = rhs ? 1 : 0;
    for (;;) {
        uint64_t &slot = coeffs_[col];
        if (slot == 0) {
            slot = c;
            rhs_[col] = r;
            if (pivot)
                *pivot = col;
            return InsertResult::Inserted;
        }
        c ^= slot;
        r ^= rhs_[col];
        if (c == 0)
            return r ? InsertResult::Conflict : InsertResult::Redundant;
        int tz = std::countr_zero(c);
        col += static_cast<uint64_t>(tz);
        c >>= tz;
    }
}

uint64_t RibbonSystem::rowCount() const noexcept {
    return static_cast<uint64_t>(std::count_if(coeffs_.begin(), coeffs_.end(),
                                               [](uint64_t c) { return c != 0; }));
}

uint64_t solutionWindow(std::span<const uint64_t> z, uint64_t start) noexcept {
    const uint64_t idx = start / 64;
    const unsigned shift = start % 64;
    uint64_t lo = idx < z.size() ? z[idx] >> shift : 0;
    if (shift != 0 && idx + 1 < z.size())
        lo |= z[idx + 1] << (64 - shift);
    return lo;
}

std::vector<uint64_t> RibbonSystem::backSubstitute(bool randomFill, uint64_t fillSeed) const {
    std::vector<uint64_t> z((m_ + 63) / 64, 0);
    for (uint64_t j = m_; j-- > 0;) {
        uint64_t bit;
        const uint64_t c = coeffs_[j];
        if (c == 0) {
            bit = randomFill ? (remix(fillSeed, j) & 1U) : 0;
        } else {
            // Z[j] is still 0, so the window parity covers columns j+1.. only.
            bit = rhs_[j] ^ (std::popcount(c & solutionWindow(z, j)) & 1U);
        }
        z[j / 64] |= bit << (j % 64);
    }
    return z;
}

} // namespace lsfkit
