#include "lsfkit/preprocess.hpp"

#include "lsfkit/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace lsfkit {

Schema Schema::fromJson(std::string_view json) {
    Schema s;
    try {
        const auto j = nlohmann::json::parse(json);
        s.keyColumn = j.value("key", std::string{});
        s.labelColumn = j.value("label", std::string{"label"});
        for (const auto &col : j.at("features")) {
            ColumnSpec spec;
            spec.name = col.at("name").get<std::string>();
            const std::string kind = col.value("kind", std::string{"numeric"});
            if (kind == "numeric")
                spec.kind = ColumnKind::Numeric;
            else if (kind == "categorical")
                spec.kind = ColumnKind::Categorical;
            else
                throw Error(ErrorCode::ParseError, "unknown column kind '" + kind + "' for " + spec.name);
            s.features.push_back(std::move(spec));
        }
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorCode::ParseError, std::string("schema: ") + e.what());
    }
    return s;
}

std::string Schema::toJson() const {
    nlohmann::json j;
    j["key"] = keyColumn;
    j["label"] = labelColumn;
    j["features"] = nlohmann::json::array();
    for (const auto &f : features)
        j["features"].push_back(
            {{"name", f.name}, {"kind", f.kind == ColumnKind::Numeric ? "numeric" : "categorical"}});
    return j.dump(2) + "\n";
}

size_t RawTable::column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
        throw Error(ErrorCode::MissingColumn, "column '" + std::string(name) + "' not in header");
    return static_cast<size_t>(it - header.begin());
}

double parseNumber(std::string_view text, size_t row, std::string_view column) {
    while (!text.empty() && text.front() == ' ')
        text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ')
        text.remove_suffix(1);
    if (!text.empty() && text.front() == '+')
        text.remove_prefix(1);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
        throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + ", column '" + std::string(column) +
                                               "': cannot parse '" + std::string(text) + "' as a number");
    return v;
}

Preprocessor Preprocessor::fit(const RawTable &table, const Schema &schema) {
    std::vector<Column> cols;
    for (const auto &spec : schema.features) {
        const size_t c = table.column(spec.name);
        Column col;
        col.name = spec.name;
        col.kind = spec.kind;
        if (spec.kind == ColumnKind::Numeric) {
            std::vector<double> vals(table.rows.size());
            for (size_t r = 0; r < table.rows.size(); ++r)
                vals[r] = parseNumber(table.rows[r][c], r + 1, spec.name);
            double mean = 0;
            for (double v : vals)
                mean += v;
            mean /= std::max<size_t>(vals.size(), 1);
            double var = 0;
            for (double v : vals)
                var += (v - mean) * (v - mean);
            var /= std::max<size_t>(vals.size(), 1);
            col.mean = mean;
            col.stdev = std::max(std::sqrt(var), kStdFloor);
        } else {
            for (const auto &row : table.rows)
                col.categories.push_back(row[c]);
            std::sort(col.categories.begin(), col.categories.end());
            col.categories.erase(std::unique(col.categories.begin(), col.categories.end()), col.categories.end());
        }
        cols.push_back(std::move(col));
    }
    return Preprocessor(std::move(cols));
}

Preprocessor Preprocessor::fitNumeric(std::vector<std::string> names, const FeatureMatrix &raw) {
    std::vector<Column> cols(names.size());
    for (size_t j = 0; j < names.size(); ++j) {
        double mean = 0;
        for (size_t i = 0; i < raw.rows; ++i)
            mean += raw.at(i, j);
        mean /= std::max<size_t>(raw.rows, 1);
        double var = 0;
        for (size_t i = 0; i < raw.rows; ++i)
            var += (raw.at(i, j) - mean) * (raw.at(i, j) - mean);
        var /= std::max<size_t>(raw.rows, 1);
        cols[j].name = std::move(names[j]);
        cols[j].mean = mean;
        cols[j].stdev = std::max(std::sqrt(var), kStdFloor);
    }
    return Preprocessor(std::move(cols));
}

uint32_t Preprocessor::dim() const noexcept {
    size_t d = 0;
    for (const auto &c : columns_)
        d += c.kind == ColumnKind::Numeric ? 1 : c.categories.size();
    return static_cast<uint32_t>(d);
}

void Preprocessor::transform(std::span<const std::string_view> fields, std::span<double> out) const {
    if (fields.size() != columns_.size() || out.size() != dim())
        throw Error(ErrorCode::DimensionMismatch, "feature field count does not match the preprocessor");
    size_t o = 0;
    for (size_t c = 0; c < columns_.size(); ++c) {
        const Column &col = columns_[c];
        if (col.kind == ColumnKind::Numeric) {
            out[o++] = (parseNumber(fields[c], 0, col.name) - col.mean) / col.stdev;
        } else {
            const auto it = std::lower_bound(col.categories.begin(), col.categories.end(), fields[c]);
            for (size_t k = 0; k < col.categories.size(); ++k)
                out[o + k] = 0.0;
            if (it != col.categories.end() && *it == fields[c])
                out[o + static_cast<size_t>(it - col.categories.begin())] = 1.0;
            o += col.categories.size();
        }
    }
}

void Preprocessor::transformNumeric(std::span<const double> raw, std::span<double> out) const {
    for (size_t c = 0; c < columns_.size(); ++c)
        out[c] = (raw[c] - columns_[c].mean) / columns_[c].stdev;
}

std::string Preprocessor::inverse(size_t c, std::span<const double> row) const {
    size_t o = 0;
    for (size_t k = 0; k < c; ++k)
        o += columns_[k].kind == ColumnKind::Numeric ? 1 : columns_[k].categories.size();
    const Column &col = columns_[c];
    if (col.kind == ColumnKind::Numeric) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", row[o] * col.stdev + col.mean);
        return buf;
    }
    for (size_t k = 0; k < col.categories.size(); ++k)
        if (row[o + k] == 1.0)
            return col.categories[k];
    return {};
}

void Preprocessor::serializeTo(detail::ByteWriter &out) const {
    out.u32(static_cast<uint32_t>(columns_.size()));
    for (const auto &c : columns_) {
        out.str(c.name);
        out.u8(static_cast<uint8_t>(c.kind));
        if (c.kind == ColumnKind::Numeric) {
            out.f64(c.mean);
            out.f64(c.stdev);
        } else {
            out.u32(static_cast<uint32_t>(c.categories.size()));
            for (const auto &s : c.categories)
                out.str(s);
        }
    }
}

Preprocessor Preprocessor::deserializeFrom(detail::ByteReader &in) {
    const uint32_t count = in.u32();
    if (count > in.remaining())
        throw Error(ErrorCode::TruncatedInput, "preprocessor truncated");
    std::vector<Column> cols(count);
    for (auto &c : cols) {
        c.name = in.str();
        c.kind = static_cast<ColumnKind>(in.u8());
        if (c.kind == ColumnKind::Numeric) {
            c.mean = in.f64();
            c.stdev = in.f64();
        } else if (c.kind == ColumnKind::Categorical) {
            const uint32_t k = in.u32();
            if (k > in.remaining())
                throw Error(ErrorCode::TruncatedInput, "preprocessor truncated");
            c.categories.resize(k);
            for (auto &s : c.categories)
                s = in.str();
        } else {
            throw Error(ErrorCode::InvalidArgument, "unknown column kind in container");
        }
    }
    return Preprocessor(std::move(cols));
}

} // namespace lsfkit
