#pragma once

#include "lsfkit/models.hpp"
#include "lsfkit/preprocess.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace lsfkit {

struct Dataset {
    std::vector<std::string> keys;
    FeatureMatrix features; // preprocessed
    std::vector<uint32_t> labels;
    std::vector<std::string> valueNames;
    Preprocessor prep;
    Schema schema;

    [[nodiscard]] size_t size() const noexcept { return keys.size(); }
    [[nodiscard]] uint32_t classes() const noexcept { return static_cast<uint32_t>(valueNames.size()); }
    /// Rows in the given order; scaler, schema and value names are shared.
    [[nodiscard]] Dataset subset(std::span<const size_t> rows) const;
};

/// Equal-count mixture of `classes` normals with means spacing * c and
/// standard deviation `sigma`. n is truncated to a multiple of `classes`.
/// Keys are decimal row indices, row i has label i mod classes.
Dataset genGauss(size_t n, double sigma, uint64_t seed, uint32_t classes = 8, double spacing = 2.0);

RawTable parseCsv(std::istream &in);
RawTable readCsv(const std::string &path);

/// Builds a dataset from a parsed table: fits the preprocessor, collects
/// value names in sorted order. Throws MissingColumn, ParseError, EmptyDataset.
Dataset fromTable(const RawTable &table, const Schema &schema);
Dataset loadCsv(const std::string &path, const Schema &schema);
Schema loadSchema(const std::string &path);

/// Writes key, raw feature and label columns; values round-trip to within
/// floating-point formatting precision.
void writeCsv(std::ostream &out, const Dataset &ds);
void saveCsv(const std::string &path, const Dataset &ds);

/// Stratified split: each class is shuffled under `seed` and cut by the
/// cumulative fractions. Rows keep their original relative order.
std::vector<Dataset> split(const Dataset &ds, std::span<const double> fractions, uint64_t seed);

} // namespace lsfkit
