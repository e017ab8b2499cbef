#include "lsfkit/datasets.hpp"
#include "lsfkit/error.hpp"
#include "lsfkit/lsf.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <thread>

using namespace lsfkit;

namespace {

struct Encoding {
    BitPattern pattern;
    BitString corrections;
};

// Re-derives a key's filter pattern and correction string by walking the code
// tree directly. When `filter` is null only the pattern is produced.
Encoding referenceEncoding(const CodeBook &book, uint32_t label, KeyDigest d, const VlBurr *filter) {
    Encoding e;
    const size_t leaf = book.leafOf(label);
    REQUIRE(leaf < book.size());
    uint32_t pos = 0;
    std::optional<BitStream> match;
    if (filter)
        match = filter->queryFilterStream(d);
    TreeCursor u = TreeCursor::root(book);
    while (!u.isLeaf(book)) {
        const Split sp = descend(u, book);
        const bool bit = leaf >= sp.split;
        if (sp.hasLeft && sp.hasRight) {
            const uint32_t r = optimalBitLength(std::min(sp.pRight, 1 - sp.pRight));
            const double pTaken = bit ? sp.pRight : sp.pLeft;
            if (pTaken < 0.5 || (pTaken == 0.5 && bit))
                e.pattern.appendOne(r);
            else
                e.pattern.appendAny(r);
            if (match) {
                bool all = pos + r <= match->length();
                for (uint32_t j = 0; all && j < r; ++j)
                    all = match->bit(pos + j);
                if (all)
                    e.corrections.push(bit);
            }
            pos += r;
        }
        u = bit ? sp.right : sp.left;
    }
    return e;
}

CodeBook bookFor(const Lsf &lsf, std::span<const double> x) {
    return lsf.mode() == LsfMode::Csf ? lsf.globalCode() : shannonAssign(lsf.model().predict(x));
}

enum class Kind { Gnb, Lr, FreqLearned, Csf };

Lsf buildWith(Kind kind, const test::Labelled &d, const LsfConfig &cfg = {}) {
    const auto classes = static_cast<uint32_t>(d.names.size());
    switch (kind) {
    case Kind::Gnb: {
        GnbOptions opt;
        opt.allowEmptyClasses = true;
        return Lsf::build(d.keys, d.x, d.y, d.names, gnbFit(d.x, d.y, classes, opt), {}, cfg);
    }
    case Kind::Lr: {
        LrHyper hyper;
        hyper.maxEpochs = 5;
        return Lsf::build(d.keys, d.x, d.y, d.names, lrFit(d.x, d.y, classes, hyper), {}, cfg);
    }
    case Kind::FreqLearned:
        return Lsf::build(d.keys, d.x, d.y, d.names, freqFit(d.y, classes), {}, cfg);
    case Kind::Csf:
        return Lsf::buildCsf(d.keys, d.y, d.names, cfg);
    }
    return {};
}

size_t countWrong(const Lsf &lsf, const test::Labelled &d, const QueryOptions &opt = {}) {
    size_t wrong = 0;
    for (size_t i = 0; i < d.keys.size(); ++i)
        wrong += lsf.query(d.keys[i], d.x.rows ? d.x.row(i) : std::span<const double>{}, opt) != d.y[i];
    return wrong;
}

} // namespace

TEST_SUITE("lsf") {

TEST_CASE("every key maps to its value across models, alphabets and sizes") {
    for (Kind kind : {Kind::Gnb, Kind::Lr, Kind::FreqLearned, Kind::Csf}) {
        for (uint32_t classes : {1U, 2U, 8U, 82U}) {
            for (size_t n : {size_t{0}, size_t{1}, size_t{1000}}) {
                CAPTURE(static_cast<int>(kind));
                CAPTURE(classes);
                CAPTURE(n);
                const auto d = test::labelledData(n, classes, 1000 * classes + n);
                const Lsf lsf = buildWith(kind, d);
                CHECK(lsf.size() == n);
                CHECK(countWrong(lsf, d) == 0);
            }
        }
    }
}

TEST_CASE("encoding matches an independent walk of the code tree") {
    const auto d = test::labelledData(5000, 8, 71, 1.5);
    for (Kind kind : {Kind::Gnb, Kind::Csf}) {
        const Lsf lsf = buildWith(kind, d);
        size_t unsound = 0, mismatched = 0;
        uint32_t fMax = 0, cMax = 0;
        for (size_t i = 0; i < d.keys.size(); ++i) {
            const KeyDigest dg = digest(d.keys[i], lsf.seed());
            const CodeBook book = bookFor(lsf, d.x.row(i));
            const Encoding e = referenceEncoding(book, d.y[i], dg, &lsf.filter());
            fMax = std::max(fMax, static_cast<uint32_t>(e.pattern.size()));
            cMax = std::max(cMax, static_cast<uint32_t>(e.corrections.size()));
            // No false negatives: every ONE position reads back as a match.
            BitStream f = lsf.filter().queryFilterStream(dg);
            for (uint32_t j = 0; j < e.pattern.size(); ++j)
                if (e.pattern.ones[j])
                    unsound += !f.bit(j);
            BitStream c = lsf.correction().queryStream(dg);
            for (uint32_t j = 0; j < e.corrections.size(); ++j)
                mismatched += c.bit(j) != e.corrections[j];
        }
        CHECK(unsound == 0);
        CHECK(mismatched == 0);
        CHECK(lsf.maxFilterLength() == fMax);
        CHECK(lsf.maxCorrectionLength() == cMax);
    }
}

TEST_CASE("randomized rounding keeps exactness") {
    const auto d = test::labelledData(20000, 8, 72, 1.0);
    LsfConfig cfg;
    cfg.randomizedRounding = true;
    const Lsf lsf = buildWith(Kind::Gnb, d, cfg);
    CHECK(lsf.randomizedRounding());
    CHECK(countWrong(lsf, d) == 0);
    const Lsf back = Lsf::deserialize(lsf.serialize());
    CHECK(back.randomizedRounding());
    CHECK(countWrong(back, d) == 0);
}

TEST_CASE("filter lengths with randomized rounding average the real optimum") {
    CHECK(filterLength(0.2) == optimalBitLength(0.2));
    const double p = 0.1;
    const double real = optimalRealBitLength(p);
    double sum = 0;
    for (int i = 0; i < 10000; ++i)
        sum += filterLength(p, true, (i + 0.5) / 10000.0);
    CHECK(sum / 10000.0 == doctest::Approx(real).epsilon(1e-3));
}

TEST_CASE("fast path is semantics preserving and used") {
    const Dataset ds = genGauss(40000, 0.5, 73);
    const Lsf lsf = Lsf::build(ds.keys, ds.features, ds.labels, ds.valueNames,
                               gnbFit(ds.features, ds.labels, ds.classes()), ds.prep);
    QueryStats fast, slow;
    QueryOptions force;
    force.forceSlowPath = true;
    size_t differ = 0;
    for (size_t i = 0; i < ds.size(); ++i) {
        const auto x = ds.features.row(i);
        differ += lsf.query(ds.keys[i], x, {}, &fast) != lsf.query(ds.keys[i], x, force, &slow);
    }
    // Non-keys too: any answer is allowed, but both paths must give the same one.
    for (size_t i = 0; i < 20000; ++i) {
        const std::string k = "absent-" + std::to_string(i);
        const double x[] = {static_cast<double>(i % 40) / 10.0 - 2.0};
        const uint32_t a = lsf.query(k, x);
        CHECK(a < lsf.classes());
        differ += a != lsf.query(k, x, force);
    }
    CHECK(differ == 0);
    CHECK(fast.queries == ds.size());
    CHECK(fast.fastPath > ds.size() / 2);
    CHECK(slow.fastPath == 0);
    CHECK(slow.codeBooks == ds.size());
}

TEST_CASE("space ledger adds up") {
    const auto d = test::labelledData(30000, 8, 74, 1.0);
    for (Kind kind : {Kind::Gnb, Kind::Lr, Kind::Csf}) {
        const Lsf lsf = buildWith(kind, d);
        const SpaceLedger l = lsf.ledger();
        CHECK(l.keys == 30000);
        CHECK(l.totalBits == 8 * lsf.serialize().size());
        CHECK(l.totalBits == l.modelBits + l.filterPayloadBits + l.correctionPayloadBits + l.metadataBits);
        CHECK(l.sigmaBits == doctest::Approx(l.surprisalBits + static_cast<double>(l.modelBits)));
        CHECK(l.modelBits == lsf.model().encodedBits());
        CHECK(l.surprisalBits == doctest::Approx(surprisal(lsf.model(), d.x, d.y)));
        CHECK(l.overheadDefined());
        CHECK(l.overheadRatio() > 1.0);
        CHECK(l.perKey(static_cast<double>(l.totalBits)) == doctest::Approx(l.totalBits / 30000.0));
    }
}

TEST_CASE("single-value alphabets cost no payload") {
    const auto d = test::labelledData(1000, 1, 75);
    const Lsf lsf = buildWith(Kind::Gnb, d);
    const SpaceLedger l = lsf.ledger();
    CHECK(l.payloadBits() == 0);
    CHECK(l.surprisalBits == 0.0);
    CHECK_FALSE(l.overheadDefined());
    CHECK(std::isnan(l.overheadRatio()));
}

TEST_CASE("a miscalibrated model pays for it") {
    const size_t n = 100000;
    const auto keys = test::indexKeys(n);
    const auto y = test::sampleLabels(n, {0.7, 0.3}, 76);
    const std::vector<std::string> names = {"a", "b"};
    const Lsf calibrated = Lsf::build(keys, FeatureMatrix{}, y, names, FreqModel{{70, 30}});
    const Lsf overconfident = Lsf::build(keys, FeatureMatrix{}, y, names, FreqModel{{90, 10}});
    CHECK(overconfident.ledger().payloadBits() > calibrated.ledger().payloadBits());
    CHECK(overconfident.ledger().surprisalBits > calibrated.ledger().surprisalBits);
}

TEST_CASE("construction errors") {
    const auto d = test::labelledData(100, 4, 77);
    const std::vector<std::string> names = {"a", "b", "c", "d"};
    const GnbModel g = gnbFit(d.x, d.y, 4);

    auto codeOf = [](auto &&fn) {
        try {
            fn();
        } catch (const Error &e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };

    auto dupKeys = d.keys;
    dupKeys[5] = dupKeys[9];
    CHECK(codeOf([&] { (void)Lsf::build(dupKeys, d.x, d.y, names, g); }) == ErrorCode::DuplicateKey);
    CHECK(codeOf([&] { (void)Lsf::buildCsf(dupKeys, d.y, names); }) == ErrorCode::DuplicateKey);

    FeatureMatrix wide(100, 2);
    CHECK(codeOf([&] { (void)Lsf::build(d.keys, wide, d.y, names, g); }) == ErrorCode::ModelDimensionMismatch);
    const std::vector<std::string> three = {"a", "b", "c"};
    CHECK(codeOf([&] { (void)Lsf::build(d.keys, d.x, d.y, three, g); }) == ErrorCode::ModelDimensionMismatch);
    const std::vector<uint32_t> shortLabels(d.y.begin(), d.y.begin() + 50);
    CHECK(codeOf([&] { (void)Lsf::build(d.keys, d.x, shortLabels, names, g); }) == ErrorCode::DimensionMismatch);
    auto badLabels = d.y;
    badLabels[0] = 9;
    CHECK_THROWS_AS((void)Lsf::buildCsf(d.keys, badLabels, names), Error);
}

TEST_CASE("concurrent queries agree with sequential ones") {
    const auto d = test::labelledData(50000, 8, 78, 1.0);
    const Lsf lsf = buildWith(Kind::Gnb, d);
    std::vector<uint32_t> seq(d.keys.size()), par(d.keys.size());
    for (size_t i = 0; i < seq.size(); ++i)
        seq[i] = lsf.query(d.keys[i], d.x.row(i));
    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t)
        pool.emplace_back([&, t] {
            for (size_t i = static_cast<size_t>(t); i < par.size(); i += 4)
                par[i] = lsf.query(d.keys[i], d.x.row(i));
        });
    for (auto &th : pool)
        th.join();
    CHECK(seq == par);
    CHECK(seq == d.y);
}

TEST_CASE("weighted relative membership") {
    test::Rng rng(79);
    const size_t n = 60000;
    std::vector<KeyDigest> keys(n);
    std::vector<char> member(n);
    std::vector<double> weight(n);
    for (size_t i = 0; i < n; ++i) {
        keys[i] = digest("wrm-" + std::to_string(i), 1);
        weight[i] = 0.5 * rng.uniform();
        member[i] = rng.coin(weight[i]);
    }
    const Wrm wrm = Wrm::build(keys, member, weight);
    size_t wrong = 0;
    for (size_t i = 0; i < n; ++i)
        wrong += wrm.query(keys[i], weight[i]) != static_cast<bool>(member[i]);
    CHECK(wrong == 0);
    CHECK(wrm.filterPositives() >= static_cast<uint64_t>(std::count(member.begin(), member.end(), 1)));
    CHECK(wrm.payloadBits() == wrm.filter().payloadBits() + wrm.correction().payloadBits());

    // Nobody in M: the filter still has depth, and every answer is "no".
    std::vector<char> none(n, 0);
    const Wrm empty = Wrm::build(keys, none, weight);
    size_t yes = 0;
    for (size_t i = 0; i < n; ++i)
        yes += empty.query(keys[i], weight[i]);
    CHECK(yes == 0);

    weight[3] = 0.7;
    try {
        (void)Wrm::build(keys, member, weight);
        FAIL("expected WeightOutOfRange");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::WeightOutOfRange);
    }
}

} // TEST_SUITE
