#include "lsfkit/detail/binary_io.hpp"
#include "lsfkit/error.hpp"
#include "lsfkit/lsf.hpp"

#include "golden.hpp"

#include <doctest.h>

#include <fstream>
#include <iterator>

using namespace lsfkit;

namespace {

std::vector<std::byte> readData(const std::string &name) {
    std::ifstream in(std::string(LSFKIT_TEST_DATA_DIR) + "/" + name, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing test data file " << name);
    std::vector<char> chars((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::vector<std::byte> out(chars.size());
    for (size_t i = 0; i < chars.size(); ++i)
        out[i] = static_cast<std::byte>(chars[i]);
    return out;
}

ErrorCode failureOf(std::span<const std::byte> bytes) {
    try {
        (void)Lsf::deserialize(bytes);
    } catch (const Error &e) {
        return e.code();
    }
    FAIL("deserialize accepted corrupted input");
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST_SUITE("serialization") {

TEST_CASE("CRC-32 check value") {
    const std::string s = "123456789";
    CHECK(detail::crc32(std::as_bytes(std::span(s.data(), s.size()))) == 0xCBF43926U);
    CHECK(detail::crc32({}) == 0U);
}

TEST_CASE("byte writer and reader are little endian and bounds checked") {
    detail::ByteWriter w;
    w.u16(0x0102);
    w.u32(0x03040506);
    w.u64(0x0708090A0B0C0D0EULL);
    w.f64(-2.5);
    w.str("hi");
    const auto &b = w.bytes();
    CHECK(b[0] == std::byte{0x02});
    CHECK(b[1] == std::byte{0x01});
    CHECK(b[2] == std::byte{0x06});
    detail::ByteReader r(b);
    CHECK(r.u16() == 0x0102);
    CHECK(r.u32() == 0x03040506U);
    CHECK(r.u64() == 0x0708090A0B0C0D0EULL);
    CHECK(r.f64() == -2.5);
    CHECK(r.str() == "hi");
    CHECK(r.remaining() == 0);
    CHECK_THROWS_AS((void)r.u8(), Error);
}

TEST_CASE("golden container is reproduced byte for byte") {
    const auto golden = readData(test::kGoldenLsfFile);
    const auto rebuilt = test::goldenLsf().serialize();
    CHECK(rebuilt.size() == golden.size());
    CHECK(rebuilt == golden);

    const Lsf lsf = Lsf::deserialize(golden);
    const Dataset &ds = test::goldenDataset();
    size_t wrong = 0;
    for (size_t i = 0; i < ds.size(); ++i)
        wrong += lsf.query(ds.keys[i], ds.features.row(i)) != ds.labels[i];
    CHECK(wrong == 0);
    CHECK(lsf.preprocessor() == ds.prep);
    CHECK(lsf.valueNames() == ds.valueNames);
}

TEST_CASE("golden variable-length structure is reproduced byte for byte") {
    const auto golden = readData(test::kGoldenVlFile);
    CHECK(test::goldenVl().serialize() == golden);
    const VlBurr vl = VlBurr::deserialize(golden);
    size_t wrong = 0;
    for (const auto &[d, v] : test::goldenVlPairs()) {
        BitStream s = vl.queryStream(d);
        for (size_t j = 0; j < v.size(); ++j)
            wrong += s.next() != v[j];
    }
    CHECK(wrong == 0);
}

TEST_CASE("header layout") {
    const auto bytes = test::goldenLsf().serialize();
    CHECK(bytes[0] == std::byte{'L'});
    CHECK(bytes[3] == std::byte{'1'});
    CHECK(bytes[4] == std::byte{1});
    CHECK(bytes[5] == std::byte{0});
    CHECK(bytes[6] == std::byte{16});
    detail::ByteReader r(std::span<const std::byte>(bytes).subspan(7));
    CHECK(r.u64() == kDefaultMasterSeed);
    CHECK(r.u64() == 10000);
    CHECK(r.u32() == 8);

    const auto d = test::labelledData(100, 3, 1);
    const auto csf = Lsf::buildCsf(d.keys, d.y, d.names).serialize();
    CHECK(csf[6] == std::byte{17});
}

TEST_CASE("serialize after deserialize is the identity") {
    const auto d = test::labelledData(5000, 82, 2);
    LsfConfig cfg;
    cfg.seed = 12345;
    cfg.randomizedRounding = true;
    for (const Lsf &lsf : {Lsf::build(d.keys, d.x, d.y, d.names, lrFit(d.x, d.y, 82, {0.05, 256, 3}), {}, cfg),
                          Lsf::buildCsf(d.keys, d.y, d.names, cfg), Lsf::build(std::vector<std::string>{}, FeatureMatrix{}, std::vector<uint32_t>{}, {"only"}, FreqModel{{0}})}) {
        const auto bytes = lsf.serialize();
        const Lsf back = Lsf::deserialize(bytes);
        CHECK(back.serialize() == bytes);
        CHECK(back.seed() == lsf.seed());
        CHECK(back.mode() == lsf.mode());
        CHECK(back.maxFilterLength() == lsf.maxFilterLength());
        CHECK(back.ledger().surprisalBits == lsf.ledger().surprisalBits);
    }
}

TEST_CASE("every corruption is detected") {
    const auto bytes = test::goldenLsf().serialize();
    test::Rng rng(3);
    for (int trial = 0; trial < 400; ++trial) {
        auto bad = bytes;
        const size_t pos = trial < 32 ? static_cast<size_t>(trial) : rng.below(bad.size());
        bad[pos] ^= static_cast<std::byte>(1 + rng.below(255));
        const ErrorCode code = failureOf(bad);
        CAPTURE(pos);
        if (pos < 4)
            CHECK(code == ErrorCode::BadMagic);
        else if (pos < 6)
            CHECK(code == ErrorCode::VersionMismatch);
        else
            CHECK(code == ErrorCode::ChecksumMismatch);
    }
}

TEST_CASE("truncation, trailing bytes and foreign files") {
    const auto bytes = test::goldenLsf().serialize();
    for (size_t keep : {size_t{0}, size_t{3}, size_t{6}, size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
        CAPTURE(keep);
        CHECK_THROWS_AS((void)Lsf::deserialize(std::span(bytes).first(keep)), Error);
    }

    // A valid checksum over a body with junk appended is still rejected.
    detail::ByteWriter w;
    w.raw(std::span(bytes).first(bytes.size() - 4));
    w.u8(0);
    const uint32_t crc = detail::crc32(w.bytes());
    w.u32(crc);
    CHECK_THROWS_AS((void)Lsf::deserialize(w.bytes()), Error);

    // A bare ribbon structure is not a container of functions.
    const auto vl = test::goldenVl().serialize();
    CHECK_THROWS_AS((void)Lsf::deserialize(vl), Error);
}

} // TEST_SUITE
