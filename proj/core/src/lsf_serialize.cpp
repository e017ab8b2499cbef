#include "lsfkit/detail/banding.hpp"
#include "lsfkit/detail/binary_io.hpp"
#include "lsfkit/error.hpp"
#include "lsfkit/lsf.hpp"

#include <cstring>

namespace lsfkit {

namespace {

constexpr uint8_t kFlagRandomizedRounding = 1;

} // namespace

std::vector<std::byte> Lsf::serialize() const {
    detail::ByteWriter w;
    w.raw(std::as_bytes(std::span(detail::kMagic)));
    w.u16(detail::kFormatVersion);
    w.u8(static_cast<uint8_t>(mode_ == LsfMode::Csf ? detail::StructureKind::Csf : detail::StructureKind::Lsf));
    w.u64(seed_);
    w.u64(n_);
    w.u32(classes());
    w.u32(fMax_);
    w.u32(cMax_);
    w.u8(randomizedRounding_ ? kFlagRandomizedRounding : 0);
    w.f64(surprisalBits_);
    model_.serializeTo(w);
    prep_.serializeTo(w);
    for (const auto &name : valueNames_)
        w.str(name);
    filter_.serializeTo(w);
    correction_.serializeTo(w);
    const uint32_t crc = detail::crc32(w.bytes());
    w.u32(crc);
    return std::move(w).take();
}

Lsf Lsf::deserialize(std::span<const std::byte> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), detail::kMagic, 4) != 0)
        throw Error(ErrorCode::BadMagic, "not an LSF1 container");
    if (bytes.size() < 7)
        throw Error(ErrorCode::TruncatedInput, "container header truncated");
    detail::ByteReader head(bytes.subspan(4, 3));
    const uint16_t version = head.u16();
    if (version != detail::kFormatVersion)
        throw Error(ErrorCode::VersionMismatch, "container version " + std::to_string(version) + ", expected " +
                                                    std::to_string(detail::kFormatVersion));
    if (bytes.size() < 11)
        throw Error(ErrorCode::TruncatedInput, "container truncated");
    const auto body = bytes.first(bytes.size() - 4);
    detail::ByteReader trailer(bytes.last(4));
    if (trailer.u32() != detail::crc32(body))
        throw Error(ErrorCode::ChecksumMismatch, "container checksum does not match its contents");

    detail::ByteReader r(body);
    r.raw(6);
    const auto kind = static_cast<detail::StructureKind>(r.u8());
    if (kind != detail::StructureKind::Lsf && kind != detail::StructureKind::Csf)
        throw Error(ErrorCode::BadMagic, "container does not hold a learned static function");
    Lsf lsf;
    lsf.mode_ = kind == detail::StructureKind::Csf ? LsfMode::Csf : LsfMode::Learned;
    lsf.seed_ = r.u64();
    lsf.n_ = r.u64();
    const uint32_t classes = r.u32();
    lsf.fMax_ = r.u32();
    lsf.cMax_ = r.u32();
    lsf.randomizedRounding_ = (r.u8() & kFlagRandomizedRounding) != 0;
    lsf.surprisalBits_ = r.f64();
    lsf.model_ = ProbabilityModel::deserializeFrom(r);
    lsf.prep_ = Preprocessor::deserializeFrom(r);
    if (classes > r.remaining())
        throw Error(ErrorCode::TruncatedInput, "value table truncated");
    lsf.valueNames_.resize(classes);
    for (auto &name : lsf.valueNames_)
        name = r.str();
    lsf.filter_ = VlBurr::deserializeFrom(r);
    lsf.correction_ = VlBurr::deserializeFrom(r);
    if (r.remaining() != 0)
        throw Error(ErrorCode::InvalidArgument, "trailing bytes after container body");
    if (lsf.model_.classes() != classes)
        throw Error(ErrorCode::ModelDimensionMismatch, "model and value table disagree on the class count");
    if (lsf.mode_ == LsfMode::Csf && classes > 0)
        lsf.globalCode_ = huffmanAssign(lsf.model_.predict({}));
    return lsf;
}

SpaceLedger Lsf::ledger() const {
    SpaceLedger l;
    l.keys = n_;
    l.modelBits = model_.encodedBits();
    l.filterPayloadBits = filter_.payloadBits();
    l.correctionPayloadBits = correction_.payloadBits();
    l.totalBits = 8 * serialize().size();
    l.metadataBits = l.totalBits - l.modelBits - l.filterPayloadBits - l.correctionPayloadBits;
    l.surprisalBits = surprisalBits_;
    l.sigmaBits = surprisalBits_ + static_cast<double>(l.modelBits);
    return l;
}

} // namespace lsfkit
