#include "lsfkit/error.hpp"
#include "lsfkit/models.hpp"
#include "lsfkit/preprocess.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace lsfkit;

namespace {

LrModel randomLr(test::Rng &rng, uint32_t dim, uint32_t classes) {
    LrModel m = LrModel::zeros(dim, classes);
    for (double &w : m.weights)
        w = rng.normal();
    for (double &b : m.bias)
        b = rng.normal();
    return m;
}

FeatureMatrix randomFeatures(test::Rng &rng, size_t rows, size_t cols) {
    FeatureMatrix x(rows, cols);
    for (double &v : x.values)
        v = rng.normal();
    return x;
}

std::vector<uint32_t> randomLabels(test::Rng &rng, size_t n, uint32_t classes) {
    std::vector<uint32_t> y(n);
    for (auto &v : y)
        v = static_cast<uint32_t>(rng.below(classes));
    return y;
}

double maxRelativeGradientError(uint64_t seed) {
    test::Rng rng(seed);
    const LrModel m = randomLr(rng, 4, 3);
    const FeatureMatrix x = randomFeatures(rng, 40, 4);
    const auto y = randomLabels(rng, 40, 3);
    LrModel grad;
    lrLoss(m, x, y, &grad);
    const double h = 1e-5;
    double worst = 0;
    auto check = [&](double analytic, auto &&perturb) {
        LrModel plus = m, minus = m;
        perturb(plus, h);
        perturb(minus, -h);
        const double numeric = (lrLoss(plus, x, y) - lrLoss(minus, x, y)) / (2 * h);
        worst = std::max(worst, std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric)));
    };
    for (size_t i = 0; i < m.weights.size(); ++i)
        check(grad.weights[i], [i](LrModel &mm, double d) { mm.weights[i] += d; });
    for (size_t c = 0; c < m.bias.size(); ++c)
        check(grad.bias[c], [c](LrModel &mm, double d) { mm.bias[c] += d; });
    return worst;
}

} // namespace

TEST_SUITE("models") {

TEST_CASE("predictions are valid distributions for any finite input") {
    test::Rng rng(51);
    for (int trial = 0; trial < 200; ++trial) {
        const auto dim = static_cast<uint32_t>(1 + rng.below(5));
        const auto classes = static_cast<uint32_t>(1 + rng.below(20));
        const FeatureMatrix x = randomFeatures(rng, 50, dim);
        const auto y = randomLabels(rng, 50, classes);
        GnbOptions opt;
        opt.allowEmptyClasses = true;
        const ProbabilityModel models[] = {ProbabilityModel(gnbFit(x, y, classes, opt)),
                                           ProbabilityModel(randomLr(rng, dim, classes)),
                                           ProbabilityModel(freqFit(y, classes))};
        for (const auto &model : models) {
            std::vector<double> in(dim);
            for (double &v : in)
                v = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(9)) - 2);
            const Distribution d = model.predict(in);
            REQUIRE(d.size() == classes);
            double sum = 0;
            for (double p : d.probs()) {
                REQUIRE(std::isfinite(p));
                REQUIRE(p >= kProbabilityFloor);
                sum += p;
            }
            REQUIRE(std::abs(sum - 1) <= 1e-9);
            REQUIRE(model.quantized().predict(in).size() == classes);
        }
    }
}

TEST_CASE("GNB fit recovers class statistics") {
    const FeatureMatrix x = [] {
        FeatureMatrix m(4, 1);
        m.values = {0.0, 2.0, 10.0, 14.0};
        return m;
    }();
    const std::vector<uint32_t> y = {0, 0, 1, 1};
    const GnbModel g = gnbFit(x, y, 2);
    CHECK(g.priors[0] == doctest::Approx(0.5));
    CHECK(g.means[0] == doctest::Approx(1.0));
    CHECK(g.means[1] == doctest::Approx(12.0));
    CHECK(g.variances[0] == doctest::Approx(1.0));
    CHECK(g.variances[1] == doctest::Approx(4.0));
    const ProbabilityModel m(g);
    const double left[] = {0.5};
    CHECK(m.predict(left)[0] > 0.99);
}

TEST_CASE("GNB variance floor and empty classes") {
    FeatureMatrix x(3, 1);
    x.values = {1.0, 1.0, 5.0};
    const std::vector<uint32_t> y = {0, 0, 1};
    const GnbModel g = gnbFit(x, y, 2);
    CHECK(g.variances[0] > 0);
    CHECK(std::accumulate(g.priors.begin(), g.priors.end(), 0.0) == doctest::Approx(1.0));

    try {
        (void)gnbFit(x, y, 3);
        FAIL("expected EmptyClass");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::EmptyClass);
    }
    GnbOptions opt;
    opt.allowEmptyClasses = true;
    const GnbModel g3 = gnbFit(x, y, 3, opt);
    CHECK(g3.priors[2] == 0.0);
    const double probe[] = {1.0};
    CHECK(ProbabilityModel(g3).predict(probe)[2] == doctest::Approx(kProbabilityFloor));
}

TEST_CASE("surprisal loss gradient matches central differences") {
    for (uint64_t seed : {61, 62, 63})
        CHECK(maxRelativeGradientError(seed) <= 1e-4);
}

TEST_CASE("LR training lowers the loss and is reproducible") {
    test::Rng rng(64);
    const auto d = test::labelledData(4000, 4, 65, 0.7);
    const double before = lrLoss(LrModel::zeros(1, 4), d.x, d.y);
    CHECK(before == doctest::Approx(2.0));
    LrHyper hyper;
    hyper.maxEpochs = 20;
    const LrModel a = lrFit(d.x, d.y, 4, hyper);
    const LrModel b = lrFit(d.x, d.y, 4, hyper);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
    CHECK(lrLoss(a, d.x, d.y) < 0.8 * before);
    const ProbabilityModel m(a);
    CHECK(accuracy(m, d.x, d.y) > 0.6);
}

TEST_CASE("frequency model surprisal is the zero-order entropy") {
    test::Rng rng(66);
    for (int trial = 0; trial < 20; ++trial) {
        const auto classes = static_cast<uint32_t>(1 + rng.below(30));
        const size_t n = 1 + rng.below(5000);
        const auto y = test::sampleLabels(n, rng.distribution(classes), rng.next());
        const ProbabilityModel m(freqFit(y, classes));
        std::vector<double> p(classes);
        for (uint32_t v : y)
            p[v] += 1.0 / static_cast<double>(n);
        const double h0 = entropy(p);
        // Unseen classes keep the 2^-32 floor, which shifts every other
        // probability by at most classes * 2^-32.
        CHECK(std::abs(surprisal(m, FeatureMatrix{}, y) / static_cast<double>(n) - h0) <= 1e-7);
    }
}

TEST_CASE("encoded size accounting") {
    const GnbModel g{2, 3, std::vector<double>(3, 1.0 / 3), std::vector<double>(6), std::vector<double>(6, 1.0)};
    CHECK(ProbabilityModel(g).paramCount() == 15);
    CHECK(ProbabilityModel(g).encodedBits() == 72 + 16 * 15);
    CHECK(ProbabilityModel(LrModel::zeros(4, 5)).encodedBits() == 72 + 16 * 25);
    CHECK(ProbabilityModel(FreqModel{{1, 2, 3}}).encodedBits() == 72 + 64 * 3);

    for (const ProbabilityModel &m : {ProbabilityModel(g), ProbabilityModel(LrModel::zeros(4, 5)),
                                      ProbabilityModel(FreqModel{{1, 2, 3}})}) {
        detail::ByteWriter w;
        m.serializeTo(w);
        CHECK(8 * w.size() == m.encodedBits());
    }
}

TEST_CASE("16-bit storage") {
    test::Rng rng(67);
    const LrModel lr = randomLr(rng, 3, 4);
    const ProbabilityModel q = ProbabilityModel(lr).quantized();
    for (size_t i = 0; i < lr.weights.size(); ++i)
        CHECK(std::abs(q.lr()->weights[i] - lr.weights[i]) <= std::abs(lr.weights[i]) * 0x1p-11 + 1e-7);
    // Quantizing twice changes nothing, and serialization keeps every bit.
    const ProbabilityModel qq = q.quantized();
    CHECK(qq.lr()->weights == q.lr()->weights);
    detail::ByteWriter w;
    q.serializeTo(w);
    detail::ByteReader r(w.bytes());
    const ProbabilityModel back = ProbabilityModel::deserializeFrom(r);
    CHECK(back.kind() == ModelKind::Lr);
    CHECK(back.lr()->weights == q.lr()->weights);
    CHECK(back.lr()->bias == q.lr()->bias);

    // Tiny positive variances stay positive after rounding.
    GnbModel g{1, 1, {1.0}, {0.0}, {1e-12}};
    CHECK(ProbabilityModel(g).quantized().gnb()->variances[0] > 0);

    // On separable data the quantized model loses at most a sliver of surprisal.
    const auto d = test::labelledData(20000, 8, 68, 1.0);
    const ProbabilityModel full(gnbFit(d.x, d.y, 8));
    const double s0 = surprisal(full, d.x, d.y);
    const double s1 = surprisal(full.quantized(), d.x, d.y);
    CHECK(s1 <= s0 * 1.001);
}

TEST_CASE("model deserialization rejects garbage") {
    detail::ByteWriter w;
    w.u8(9);
    w.u32(1);
    w.u32(1);
    detail::ByteReader r(w.bytes());
    CHECK_THROWS_AS((void)ProbabilityModel::deserializeFrom(r), Error);

    detail::ByteWriter t;
    ProbabilityModel(LrModel::zeros(2, 2)).serializeTo(t);
    auto bytes = t.bytes();
    bytes.resize(bytes.size() - 3);
    detail::ByteReader rt(bytes);
    CHECK_THROWS_AS((void)ProbabilityModel::deserializeFrom(rt), Error);
}

TEST_CASE("dimension checks") {
    const ProbabilityModel m(LrModel::zeros(2, 3));
    const double wrong[] = {1.0};
    CHECK_THROWS_AS((void)m.predict(wrong), Error);
    FeatureMatrix x(2, 1);
    const std::vector<uint32_t> y = {0};
    CHECK_THROWS_AS((void)gnbFit(x, y, 2), Error);
    const std::vector<uint32_t> bad = {0, 5};
    CHECK_THROWS_AS((void)lrFit(x, bad, 2), Error);
}

TEST_CASE("calibration error") {
    const double conf[] = {0.9, 0.6, 0.9, 0.6};
    const char correct[] = {1, 0, 1, 1};
    CHECK(eceFromConfidences(conf, correct, 2) == doctest::Approx(0.1));
    CHECK(eceFromConfidences({}, {}, 50) == 0.0);

    // Labels drawn from the model's own distribution are calibrated.
    test::Rng rng(69);
    std::vector<double> c(200000);
    std::vector<char> ok(c.size());
    for (size_t i = 0; i < c.size(); ++i) {
        c[i] = 0.3 + 0.7 * rng.uniform();
        ok[i] = rng.coin(c[i]);
    }
    CHECK(eceFromConfidences(c, ok, 50) < 0.01);
    for (auto &v : c)
        v = std::min(1.0, v + 0.1);
    CHECK(eceFromConfidences(c, ok, 50) > 0.05);
}

TEST_CASE("accuracy") {
    FeatureMatrix x(3, 1);
    x.values = {-5.0, 5.0, 5.0};
    LrModel m = LrModel::zeros(1, 2);
    m.weights = {-1.0, 1.0};
    const std::vector<uint32_t> y = {0, 1, 0};
    CHECK(accuracy(ProbabilityModel(m), x, y) == doctest::Approx(2.0 / 3));
    CHECK(accuracy(ProbabilityModel(m), FeatureMatrix{}, {}) == 0.0);
}

TEST_CASE("schema JSON round trip") {
    const Schema s = Schema::fromJson(
        R"({"key": "id", "label": "cls", "features": [{"name": "a", "kind": "numeric"}, {"name": "b", "kind": "categorical"}]})");
    CHECK(s.keyColumn == "id");
    CHECK(s.labelColumn == "cls");
    REQUIRE(s.features.size() == 2);
    CHECK(s.features[1].kind == ColumnKind::Categorical);
    const Schema t = Schema::fromJson(s.toJson());
    CHECK(t.toJson() == s.toJson());
    CHECK_THROWS_AS((void)Schema::fromJson("{"), Error);
    CHECK_THROWS_AS((void)Schema::fromJson(R"({"features": [{"name": "a", "kind": "text"}]})"), Error);
}

TEST_CASE("preprocessor scaling and one-hot blocks") {
    RawTable t;
    t.header = {"a", "b", "label"};
    t.rows = {{"1", "red", "x"}, {"3", "blue", "y"}, {"5", "red", "x"}};
    Schema s;
    s.features = {{"a", ColumnKind::Numeric}, {"b", ColumnKind::Categorical}};
    const Preprocessor p = Preprocessor::fit(t, s);
    CHECK(p.dim() == 3);
    CHECK(p.columns()[0].mean == doctest::Approx(3.0));
    CHECK(p.columns()[1].categories == std::vector<std::string>{"blue", "red"});

    std::vector<double> out(3);
    const std::string_view fields[] = {"3", "red"};
    p.transform(fields, out);
    CHECK(out[0] == doctest::Approx(0.0));
    CHECK(out[1] == 0.0);
    CHECK(out[2] == 1.0);
    CHECK(p.inverse(1, out) == "red");
    const std::string_view unknown[] = {"5", "green"};
    p.transform(unknown, out);
    CHECK(out[1] == 0.0);
    CHECK(out[2] == 0.0);
    CHECK(std::stod(p.inverse(0, out)) == doctest::Approx(5.0));

    detail::ByteWriter w;
    p.serializeTo(w);
    detail::ByteReader r(w.bytes());
    CHECK(Preprocessor::deserializeFrom(r) == p);

    t.rows[1][0] = "three";
    try {
        (void)Preprocessor::fit(t, s);
        FAIL("expected ParseError");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(std::string(e.what()).find("'a'") != std::string::npos);
    }
    s.features.push_back({"missing", ColumnKind::Numeric});
    CHECK_THROWS_AS((void)Preprocessor::fit(t, s), Error);
}

TEST_CASE("numbers parse strictly") {
    CHECK(parseNumber("1.5e3", 0, "x") == 1500.0);
    CHECK(parseNumber("-0.25", 0, "x") == -0.25);
    CHECK_THROWS_AS((void)parseNumber("", 0, "x"), Error);
    CHECK_THROWS_AS((void)parseNumber("1.0abc", 0, "x"), Error);
    CHECK_THROWS_AS((void)parseNumber("nan", 0, "x"), Error);
}

} // TEST_SUITE
