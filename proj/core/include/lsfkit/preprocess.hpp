#pragma once

#include "lsfkit/detail/binary_io.hpp"
#include "lsfkit/models.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lsfkit {

enum class ColumnKind : uint8_t { Numeric = 1, Categorical = 2 };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
};

/// Which CSV columns are the key, the label and the features. An empty key
/// column means keys are the decimal row indices.
struct Schema {
    std::string keyColumn;
    std::string labelColumn = "label";
    std::vector<ColumnSpec> features;

    static Schema fromJson(std::string_view json);
    [[nodiscard]] std::string toJson() const;
};

/// Parsed CSV contents, all fields as text.
struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a header column; throws MissingColumn.
    [[nodiscard]] size_t column(std::string_view name) const;
};

/// Standard scaling for numeric columns and one-hot blocks for categorical
/// ones. Parameters are fixed at fit time so query-time featurization matches.
class Preprocessor {
public:
    struct Column {
        std::string name;
        ColumnKind kind = ColumnKind::Numeric;
        double mean = 0;
        double stdev = 1;
        std::vector<std::string> categories; // sorted

        friend bool operator==(const Column &, const Column &) = default;
    };

    static constexpr double kStdFloor = 1e-9;

    Preprocessor() = default;
    explicit Preprocessor(std::vector<Column> columns) : columns_(std::move(columns)) {}

    /// Fits on the schema's feature columns of `table`; throws ParseError
    /// naming row and column for unparseable numerics.
    static Preprocessor fit(const RawTable &table, const Schema &schema);
    /// Fits an all-numeric preprocessor on raw values (one column per name).
    static Preprocessor fitNumeric(std::vector<std::string> names, const FeatureMatrix &raw);

    [[nodiscard]] uint32_t dim() const noexcept;
    [[nodiscard]] const std::vector<Column> &columns() const noexcept { return columns_; }

    /// `fields` are the raw feature values in column order. Unknown categories
    /// produce an all-zero one-hot block.
    void transform(std::span<const std::string_view> fields, std::span<double> out) const;
    /// All-numeric fast path.
    void transformNumeric(std::span<const double> raw, std::span<double> out) const;
    /// Recovers the text of column `c` from a transformed row.
    [[nodiscard]] std::string inverse(size_t c, std::span<const double> row) const;

    void serializeTo(detail::ByteWriter &out) const;
    static Preprocessor deserializeFrom(detail::ByteReader &in);

    friend bool operator==(const Preprocessor &, const Preprocessor &) = default;

private:
    std::vector<Column> columns_;
};

/// Parses a finite double; throws ParseError mentioning row and column.
double parseNumber(std::string_view text, size_t row, std::string_view column);

} // namespace lsfkit
