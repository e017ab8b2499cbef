#include "lsfkit/ribbon.hpp"

#include <cassert>

namespace lsfkit {

namespace {

// Augmented row: coefficient bits in [0, columns), RHS at bit `columns`
// (requires columns < kMaxColumns).
struct Reduced {
    std::vector<std::bitset<BitMatrix::kMaxColumns + 1>> rows;
    std::vector<size_t> pivotCols;
    bool consistent = true;
};

Reduced eliminate(const BitMatrix &h, const std::vector<bool> *f) {
    using Row = std::bitset<BitMatrix::kMaxColumns + 1>;
    const size_t cols = h.columns;
    Reduced out;
    std::vector<Row> rows;
    rows.reserve(h.rows.size());
    for (size_t i = 0; i < h.rows.size(); ++i) {
        Row r;
        for (size_t j = 0; j < cols; ++j)
            r[j] = h.rows[i][j];
        if (f)
            r[BitMatrix::kMaxColumns] = (*f)[i];
        rows.push_back(r);
    }
    size_t rank = 0;
    for (size_t col = 0; col < cols && rank < rows.size(); ++col) {
        size_t sel = rank;
        while (sel < rows.size() && !rows[sel][col])
            ++sel;
        if (sel == rows.size())
            continue;
        std::swap(rows[rank], rows[sel]);
        for (size_t i = 0; i < rows.size(); ++i)
            if (i != rank && rows[i][col])
                rows[i] ^= rows[rank];
        out.pivotCols.push_back(col);
        ++rank;
    }
    for (size_t i = rank; i < rows.size(); ++i)
        if (rows[i][BitMatrix::kMaxColumns])
            out.consistent = false;
    rows.resize(rank);
    out.rows = std::move(rows);
    return out;
}

} // namespace

std::optional<std::bitset<BitMatrix::kMaxColumns>> bruteForceSolveGF2(const BitMatrix &h,
                                                                      const std::vector<bool> &f) {
    assert(h.columns <= BitMatrix::kMaxColumns && f.size() == h.rows.size());
    Reduced red = eliminate(h, &f);
    if (!red.consistent)
        return std::nullopt;
    // Reduced row echelon form: free variables 0, pivot variable = RHS.
    std::bitset<BitMatrix::kMaxColumns> z;
    for (size_t i = 0; i < red.rows.size(); ++i)
        z[red.pivotCols[i]] = red.rows[i][BitMatrix::kMaxColumns];
    return z;
}

size_t gf2Rank(const BitMatrix &h) { return eliminate(h, nullptr).rows.size(); }

} // namespace lsfkit
