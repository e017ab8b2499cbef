#include "lsfkit/coding.hpp"
#include "lsfkit_cli/cli.hpp"

#include <cstdio>
#include <ostream>

namespace lsfkit::cli {

std::vector<Figure4Row> figure4(size_t points) {
    std::vector<Figure4Row> rows;
    rows.reserve(points);
    for (size_t i = 1; i <= points; ++i) {
        Figure4Row row;
        row.p = 0.5 * static_cast<double>(i) / static_cast<double>(points);
        row.entropy = binaryEntropy(row.p);
        row.rReal = optimalRealBitLength(row.p);
        row.rInt = optimalBitLength(row.p);
        row.spaceReal = spaceCost(row.p, row.rReal);
        row.spaceInt = spaceCost(row.p, row.rInt);
        row.overheadReal = (row.spaceReal - row.entropy) / row.entropy;
        row.overheadInt = (row.spaceInt - row.entropy) / row.entropy;
        rows.push_back(row);
    }
    return rows;
}

Figure4Peak peakInt(const std::vector<Figure4Row> &rows) {
    Figure4Peak best;
    for (const auto &r : rows)
        if (r.overheadInt > best.overhead)
            best = {r.overheadInt, r.p};
    return best;
}

Figure4Peak peakReal(const std::vector<Figure4Row> &rows) {
    Figure4Peak best;
    for (const auto &r : rows)
        if (r.overheadReal > best.overhead)
            best = {r.overheadReal, r.p};
    return best;
}

void writeFigure4Csv(std::ostream &out, const std::vector<Figure4Row> &rows) {
    out << "p,entropy,r_real,space_real,overhead_real,r_int,space_int,overhead_int\n";
    char buf[256];
    for (const auto &r : rows) {
        std::snprintf(buf, sizeof buf, "%.6f,%.9f,%.9f,%.9f,%.9f,%u,%.9f,%.9f\n", r.p, r.entropy, r.rReal,
                      r.spaceReal, r.overheadReal, r.rInt, r.spaceInt, r.overheadInt);
        out << buf;
    }
}

} // namespace lsfkit::cli
