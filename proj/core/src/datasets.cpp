#include "lsfkit/datasets.hpp"

#include "lsfkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace lsfkit {

Dataset Dataset::subset(std::span<const size_t> rows) const {
    Dataset out;
    out.features = FeatureMatrix(rows.size(), features.cols);
    out.keys.reserve(rows.size());
    out.labels.reserve(rows.size());
    for (size_t t = 0; t < rows.size(); ++t) {
        out.keys.push_back(keys[rows[t]]);
        out.labels.push_back(labels[rows[t]]);
        std::copy_n(features.row(rows[t]).begin(), features.cols, out.features.row(t).begin());
    }
    out.valueNames = valueNames;
    out.prep = prep;
    out.schema = schema;
    return out;
}

Dataset genGauss(size_t n, double sigma, uint64_t seed, uint32_t classes, double spacing) {
    if (!(sigma > 0) || !std::isfinite(sigma))
        throw Error(ErrorCode::InvalidSigma, "sigma must be positive, got " + std::to_string(sigma));
    if (classes == 0)
        throw Error(ErrorCode::InvalidArgument, "gauss needs at least one class");
    n -= n % classes;

    std::mt19937_64 rng(seed);
    auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1p-53; };
    bool haveSpare = false;
    double spare = 0;
    auto normal = [&] {
        if (haveSpare) {
            haveSpare = false;
            return spare;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        spare = radius * std::sin(2 * std::numbers::pi * u2);
        haveSpare = true;
        return radius * std::cos(2 * std::numbers::pi * u2);
    };

    Dataset ds;
    FeatureMatrix raw(n, 1);
    ds.keys.reserve(n);
    ds.labels.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        const auto c = static_cast<uint32_t>(i % classes);
        raw.at(i, 0) = spacing * c + sigma * normal();
        ds.keys.push_back(std::to_string(i));
        ds.labels.push_back(c);
    }
    for (uint32_t c = 0; c < classes; ++c)
        ds.valueNames.push_back(std::to_string(c));
    ds.prep = Preprocessor::fitNumeric({"x"}, raw);
    ds.features = FeatureMatrix(n, 1);
    for (size_t i = 0; i < n; ++i)
        ds.prep.transformNumeric(raw.row(i), ds.features.row(i));
    ds.schema.keyColumn = "key";
    ds.schema.labelColumn = "label";
    ds.schema.features = {{"x", ColumnKind::Numeric}};
    return ds;
}

RawTable parseCsv(std::istream &in) {
    RawTable table;
    std::vector<std::string> fields;
    std::string field;
    std::string line;
    size_t lineNo = 0;
    bool haveHeader = false;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        fields.clear();
        field.clear();
        bool quoted = false;
        for (size_t i = 0; i < line.size(); ++i) {
            const char ch = line[i];
            if (quoted) {
                if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else if (ch == '"') {
                    quoted = false;
                } else {
                    field.push_back(ch);
                }
            } else if (ch == '"') {
                quoted = true;
            } else if (ch == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else {
                field.push_back(ch);
            }
        }
        if (quoted)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(lineNo) + ": unterminated quote");
        fields.push_back(std::move(field));
        if (!haveHeader) {
            table.header = fields;
            haveHeader = true;
            continue;
        }
        if (fields.size() != table.header.size())
            throw Error(ErrorCode::ParseError, "line " + std::to_string(lineNo) + ": expected " +
                                                   std::to_string(table.header.size()) + " fields, got " +
                                                   std::to_string(fields.size()));
        table.rows.push_back(fields);
    }
    if (!haveHeader)
        throw Error(ErrorCode::EmptyDataset, "CSV has no header row");
    return table;
}

RawTable readCsv(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path);
    return parseCsv(in);
}

Dataset fromTable(const RawTable &table, const Schema &schema) {
    const size_t labelCol = table.column(schema.labelColumn);
    const size_t keyCol = schema.keyColumn.empty() ? SIZE_MAX : table.column(schema.keyColumn);
    std::vector<size_t> featureCols;
    for (const auto &f : schema.features)
        featureCols.push_back(table.column(f.name));
    if (table.rows.empty())
        throw Error(ErrorCode::EmptyDataset, "CSV has no data rows");

    Dataset ds;
    ds.schema = schema;
    ds.prep = Preprocessor::fit(table, schema);

    std::map<std::string, uint32_t> names;
    for (const auto &row : table.rows)
        names.emplace(row[labelCol], 0);
    uint32_t next = 0;
    for (auto &[name, index] : names) {
        index = next++;
        ds.valueNames.push_back(name);
    }

    const size_t n = table.rows.size();
    ds.features = FeatureMatrix(n, ds.prep.dim());
    ds.keys.reserve(n);
    ds.labels.reserve(n);
    std::vector<std::string_view> fields(featureCols.size());
    for (size_t r = 0; r < n; ++r) {
        const auto &row = table.rows[r];
        ds.keys.push_back(keyCol == SIZE_MAX ? std::to_string(r) : row[keyCol]);
        ds.labels.push_back(names.at(row[labelCol]));
        for (size_t c = 0; c < featureCols.size(); ++c)
            fields[c] = row[featureCols[c]];
        ds.prep.transform(fields, ds.features.row(r));
    }
    return ds;
}

Dataset loadCsv(const std::string &path, const Schema &schema) { return fromTable(readCsv(path), schema); }

Schema loadSchema(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open schema " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return Schema::fromJson(ss.str());
}

namespace {

std::string csvField(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"')
            q.push_back('"');
        q.push_back(ch);
    }
    q.push_back('"');
    return q;
}

} // namespace

void writeCsv(std::ostream &out, const Dataset &ds) {
    const std::string keyName = ds.schema.keyColumn.empty() ? "key" : ds.schema.keyColumn;
    out << csvField(keyName);
    for (const auto &c : ds.prep.columns())
        out << ',' << csvField(c.name);
    out << ',' << csvField(ds.schema.labelColumn) << '\n';
    for (size_t i = 0; i < ds.size(); ++i) {
        out << csvField(ds.keys[i]);
        for (size_t c = 0; c < ds.prep.columns().size(); ++c)
            out << ',' << csvField(ds.prep.inverse(c, ds.features.row(i)));
        out << ',' << csvField(ds.valueNames[ds.labels[i]]) << '\n';
    }
}

void saveCsv(const std::string &path, const Dataset &ds) {
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path);
    writeCsv(out, ds);
    if (!out)
        throw Error(ErrorCode::Io, "write failed for " + path);
}

std::vector<Dataset> split(const Dataset &ds, std::span<const double> fractions, uint64_t seed) {
    double sum = 0;
    for (double f : fractions) {
        if (!(f >= 0))
            throw Error(ErrorCode::FractionSum, "fractions must be nonnegative");
        sum += f;
    }
    if (fractions.empty() || std::abs(sum - 1.0) > 1e-9)
        throw Error(ErrorCode::FractionSum, "fractions must sum to 1");

    std::vector<std::vector<size_t>> byClass(ds.classes());
    for (size_t i = 0; i < ds.size(); ++i)
        byClass[ds.labels[i]].push_back(i);
    std::mt19937_64 rng(seed);
    std::vector<std::vector<size_t>> parts(fractions.size());
    for (auto &members : byClass) {
        std::shuffle(members.begin(), members.end(), rng);
        double cumulative = 0;
        size_t begin = 0;
        for (size_t k = 0; k < fractions.size(); ++k) {
            cumulative += fractions[k];
            const size_t end = k + 1 == fractions.size()
                                   ? members.size()
                                   : std::min(members.size(), static_cast<size_t>(std::llround(
                                                                  cumulative * static_cast<double>(members.size()))));
            for (size_t t = begin; t < std::max(begin, end); ++t)
                parts[k].push_back(members[t]);
            begin = std::max(begin, end);
        }
    }
    std::vector<Dataset> out;
    for (auto &rows : parts) {
        std::sort(rows.begin(), rows.end());
        out.push_back(ds.subset(rows));
    }
    return out;
}

} // namespace lsfkit
