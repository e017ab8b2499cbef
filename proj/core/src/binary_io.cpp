#include "lsfkit/detail/binary_io.hpp"

#include "lsfkit/error.hpp"

#include <algorithm>
#include <bit>
#include <zlib.h>

namespace lsfkit {

std::string_view errorName(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::DuplicateDigest: return "DuplicateDigest";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::ConstructionFailed: return "ConstructionFailed";
    case ErrorCode::StreamExhausted: return "StreamExhausted";
    case ErrorCode::NotInner: return "NotInner";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::WeightOutOfRange: return "WeightOutOfRange";
    case ErrorCode::ModelDimensionMismatch: return "ModelDimensionMismatch";
    case ErrorCode::InvalidSigma: return "InvalidSigma";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::FractionSum: return "FractionSum";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::TruncatedInput: return "TruncatedInput";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

namespace detail {

void ByteWriter::f64(double v) { u64(std::bit_cast<uint64_t>(v)); }

void ByteWriter::str(std::string_view s) {
    u32(static_cast<uint32_t>(s.size()));
    raw(std::as_bytes(std::span(s.data(), s.size())));
}

void ByteReader::need(size_t n) const {
    if (n > remaining())
        throw Error(ErrorCode::TruncatedInput, "need " + std::to_string(n) + " bytes at offset " +
                                                   std::to_string(pos_) + ", have " +
                                                   std::to_string(remaining()));
}

uint64_t ByteReader::get(int n) {
    need(static_cast<size_t>(n));
    uint64_t v = 0;
    for (int i = 0; i < n; ++i)
        v |= static_cast<uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += static_cast<size_t>(n);
    return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::span<const std::byte> ByteReader::raw(size_t n) {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::vector<uint64_t> ByteReader::words(size_t n) {
    if (n > remaining() / 8)
        need(n * 8);
    std::vector<uint64_t> out(n);
    for (auto &w : out)
        w = u64();
    return out;
}

std::string ByteReader::str() {
    uint32_t n = u32();
    auto bytes = raw(n);
    return {reinterpret_cast<const char *>(bytes.data()), bytes.size()};
}

uint32_t crc32(std::span<const std::byte> data) noexcept {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks for very large buffers
    const auto *p = reinterpret_cast<const Bytef *>(data.data());
    size_t left = data.size();
    while (left > 0) {
        auto chunk = static_cast<uInt>(std::min<size_t>(left, 1u << 30));
        crc = ::crc32(crc, p, chunk);
        p += chunk;
        left -= chunk;
    }
    return static_cast<uint32_t>(crc);
}

} // namespace detail
} // namespace lsfkit
