#include "lsfkit/datasets.hpp"
#include "lsfkit/error.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lsfkit;

namespace {

std::string toCsv(const Dataset &ds) {
    std::ostringstream out;
    writeCsv(out, ds);
    return out.str();
}

double rawValue(const Dataset &ds, size_t i) {
    const auto &c = ds.prep.columns()[0];
    return ds.features.at(i, 0) * c.stdev + c.mean;
}

} // namespace

TEST_SUITE("datasets") {

TEST_CASE("gauss generation is reproducible") {
    const Dataset a = genGauss(10000, 1.0, 42);
    const Dataset b = genGauss(10000, 1.0, 42);
    CHECK(a.keys == b.keys);
    CHECK(a.labels == b.labels);
    CHECK(a.features.values == b.features.values);
    CHECK(toCsv(a) == toCsv(b));
    CHECK(genGauss(10000, 1.0, 43).features.values != a.features.values);
}

TEST_CASE("gauss shape") {
    const Dataset ds = genGauss(1003, 0.5, 1);
    CHECK(ds.size() == 1000);
    CHECK(ds.classes() == 8);
    CHECK(ds.keys[17] == "17");
    CHECK(ds.labels[17] == 1);
    CHECK(ds.valueNames[3] == "3");
    CHECK(ds.schema.keyColumn == "key");
    CHECK(ds.prep.columns().size() == 1);
    CHECK_THROWS_AS((void)genGauss(10, 0.0, 1), Error);
    CHECK_THROWS_AS((void)genGauss(10, -1.0, 1), Error);
    CHECK(genGauss(5, 1.0, 1).size() == 0);
}

TEST_CASE("gauss class statistics converge to the generator") {
    const size_t n = 400000;
    for (double sigma : {0.25, 1.0}) {
        const Dataset ds = genGauss(n, sigma, 7);
        std::vector<double> sum(8), sq(8), cnt(8);
        for (size_t i = 0; i < n; ++i) {
            const double v = rawValue(ds, i);
            sum[ds.labels[i]] += v;
            sq[ds.labels[i]] += v * v;
            cnt[ds.labels[i]] += 1;
        }
        const double tol = 4 * sigma / std::sqrt(static_cast<double>(n) / 8);
        for (uint32_t c = 0; c < 8; ++c) {
            const double mean = sum[c] / cnt[c];
            const double var = sq[c] / cnt[c] - mean * mean;
            CAPTURE(c);
            CHECK(std::abs(mean - 2.0 * c) <= tol);
            // Sample variance has standard error sigma^2 sqrt(2 / n_c).
            CHECK(std::abs(var - sigma * sigma) <= 4 * sigma * sigma * std::sqrt(2.0 / cnt[c]));
        }
    }
}

TEST_CASE("CSV round trip through writeCsv and fromTable") {
    const Dataset ds = genGauss(800, 1.0, 3);
    std::istringstream in(toCsv(ds));
    const Dataset back = fromTable(parseCsv(in), ds.schema);
    CHECK(back.keys == ds.keys);
    CHECK(back.labels == ds.labels);
    CHECK(back.valueNames == ds.valueNames);
    for (size_t i = 0; i < ds.size(); ++i)
        REQUIRE(rawValue(back, i) == doctest::Approx(rawValue(ds, i)).epsilon(1e-12));
}

TEST_CASE("CSV parsing handles quotes and rejects ragged rows") {
    std::istringstream in("id,text,label\r\n1,\"a, \"\"b\"\"\",x\n\n2,plain,y\n");
    const RawTable t = parseCsv(in);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "a, \"b\"");
    CHECK(t.rows[1][2] == "y");
    CHECK(t.column("label") == 2);
    CHECK_THROWS_AS((void)t.column("nope"), Error);

    std::istringstream ragged("a,b\n1,2,3\n");
    CHECK_THROWS_AS((void)parseCsv(ragged), Error);
    std::istringstream open("a,b\n\"1,2\n");
    CHECK_THROWS_AS((void)parseCsv(open), Error);
    std::istringstream empty("");
    CHECK_THROWS_AS((void)parseCsv(empty), Error);
}

TEST_CASE("tables with categorical features and string labels") {
    std::istringstream in("name,colour,size,label\n"
                          "a,red,1,cat\nb,blue,2,dog\nc,red,3,cat\nd,green,4,bird\n");
    Schema s;
    s.keyColumn = "name";
    s.features = {{"colour", ColumnKind::Categorical}, {"size", ColumnKind::Numeric}};
    const Dataset ds = fromTable(parseCsv(in), s);
    CHECK(ds.valueNames == std::vector<std::string>{"bird", "cat", "dog"});
    CHECK(ds.labels == std::vector<uint32_t>{1, 2, 1, 0});
    CHECK(ds.features.cols == 4);
    CHECK(ds.keys[3] == "d");

    std::istringstream header("name,label\n");
    Schema bare;
    CHECK_THROWS_AS((void)fromTable(parseCsv(header), bare), Error);
    std::istringstream noLabel("name,x\na,1\n");
    CHECK_THROWS_AS((void)fromTable(parseCsv(noLabel), bare), Error);
}

TEST_CASE("keys default to row indices") {
    std::istringstream in("x,label\n1,a\n2,b\n");
    Schema s;
    s.features = {{"x", ColumnKind::Numeric}};
    const Dataset ds = fromTable(parseCsv(in), s);
    CHECK(ds.keys == std::vector<std::string>{"0", "1"});
}

TEST_CASE("files and schema sidecars") {
    const auto dir = std::filesystem::temp_directory_path() / "lsfkit_datasets_test";
    std::filesystem::create_directories(dir);
    const std::string csv = (dir / "g.csv").string();
    const Dataset ds = genGauss(200, 1.0, 9);
    saveCsv(csv, ds);
    {
        std::ofstream(csv + ".schema.json") << ds.schema.toJson();
    }
    const Dataset back = loadCsv(csv, loadSchema(csv + ".schema.json"));
    CHECK(back.labels == ds.labels);
    CHECK_THROWS_AS((void)loadSchema((dir / "missing.json").string()), Error);
    CHECK_THROWS_AS((void)readCsv((dir / "missing.csv").string()), Error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("stratified split") {
    const Dataset ds = genGauss(10000, 1.0, 11);
    const double fractions[] = {0.9, 0.1};
    const auto parts = split(ds, fractions, 5);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].size() + parts[1].size() == ds.size());
    CHECK(parts[1].size() == 1000);
    std::vector<size_t> perClass(8);
    for (uint32_t v : parts[1].labels)
        ++perClass[v];
    for (size_t c : perClass)
        CHECK(c == 125);
    // Disjoint and order-preserving.
    std::vector<std::string> all = parts[0].keys;
    all.insert(all.end(), parts[1].keys.begin(), parts[1].keys.end());
    std::sort(all.begin(), all.end());
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    CHECK(std::is_sorted(parts[1].keys.begin(), parts[1].keys.end(),
                         [](const std::string &a, const std::string &b) { return std::stoul(a) < std::stoul(b); }));
    // Same seed, same split.
    CHECK(split(ds, fractions, 5)[1].keys == parts[1].keys);

    const double bad[] = {0.5, 0.6};
    CHECK_THROWS_AS((void)split(ds, bad, 1), Error);
    const double negative[] = {1.5, -0.5};
    CHECK_THROWS_AS((void)split(ds, negative, 1), Error);
}

} // TEST_SUITE
