#include "lsfkit/vlsf.hpp"

#include "lsfkit/error.hpp"

#include <algorithm>

namespace lsfkit {

BitString BitString::fromString(std::string_view bits) {
    BitString out;
    for (char ch : bits) {
        if (ch != '0' && ch != '1')
            throw Error(ErrorCode::InvalidArgument, "bit string may contain only 0 and 1");
        out.push(ch == '1');
    }
    return out;
}

std::string BitString::toString() const {
    std::string s;
    s.reserve(size_);
    for (size_t i = 0; i < size_; ++i)
        s.push_back((*this)[i] ? '1' : '0');
    return s;
}

BitPattern BitPattern::fromString(std::string_view symbols) {
    BitPattern p;
    for (char ch : symbols) {
        if (ch != '1' && ch != '?')
            throw Error(ErrorCode::InvalidArgument, "pattern may contain only 1 and ?");
        p.ones.push(ch == '1');
    }
    return p;
}

bool BitStream::bit(uint32_t i) const {
    if (i >= length_)
        throw Error(ErrorCode::StreamExhausted,
                    "read of bit " + std::to_string(i) + " past stream length " + std::to_string(length_));
    const bool raw = store_->rawBit(resolved_, i);
    return match_ ? raw == fingerprintBit(digest_, i) : raw;
}

bool BitStream::readAllOnes(uint32_t count) {
    bool all = true;
    for (uint32_t i = 0; i < count; ++i)
        all &= next();
    return all;
}

namespace {

detail::BandingConfig toBanding(const BuildConfig &cfg, bool randomFill) {
    if (cfg.width < 1 || cfg.width > 64 || cfg.bucketSize == 0 || cfg.bucketSize > 65535 ||
        cfg.maxLayers == 0 || cfg.maxLayers > 255 || !(cfg.overload > -1.0))
        throw Error(ErrorCode::InvalidArgument, "invalid ribbon build configuration");
    detail::BandingConfig b;
    b.overload = cfg.overload;
    b.maxLayers = cfg.maxLayers;
    b.bucketSize = cfg.bucketSize;
    b.width = cfg.width;
    b.fallbackCap = cfg.fallbackCap;
    b.randomFill = randomFill;
    return b;
}

void checkDistinct(std::vector<uint64_t> digests) {
    std::sort(digests.begin(), digests.end());
    if (std::adjacent_find(digests.begin(), digests.end()) != digests.end())
        throw Error(ErrorCode::DuplicateDigest, "two keys share a 64-bit digest");
}

} // namespace

VlBurr VlBurr::build(std::span<const std::pair<KeyDigest, BitString>> pairs, const BuildConfig &cfg,
                     BuildLog *log) {
    VlBurr out;
    size_t maxLen = 0;
    uint64_t total = 0;
    for (const auto &[d, bits] : pairs) {
        maxLen = std::max(maxLen, bits.size());
        total += bits.size();
    }
    if (maxLen > 65535)
        throw Error(ErrorCode::InvalidArgument, "values longer than 65535 bits");
    out.length_ = static_cast<uint32_t>(maxLen);
    out.storedBits_ = total;
    if (maxLen == 0) {
        std::vector<uint64_t> ds;
        for (const auto &p : pairs)
            ds.push_back(p.first.value);
        checkDistinct(std::move(ds));
        out.store_.seed = cfg.seed;
        out.store_.width = cfg.width;
        out.store_.bucketSize = cfg.bucketSize;
        out.store_.ribbons = 0;
        if (log)
            log->assign(pairs.size(), 0);
        return out;
    }
    std::vector<detail::BandingItem> items(pairs.size());
    detail::BandingArena arena;
    arena.resize(total);
    uint64_t offset = 0;
    for (size_t i = 0; i < pairs.size(); ++i) {
        const BitString &bits = pairs[i].second;
        items[i] = {pairs[i].first, static_cast<uint32_t>(bits.size()), offset};
        for (size_t j = 0; j < bits.size(); ++j)
            arena.set(offset + j, true, bits[j]);
        offset += bits.size();
    }
    out.store_ = detail::band(items, arena, out.length_, cfg.seed, toBanding(cfg, false), log);
    return out;
}

VlBurr VlBurr::buildFilter(std::span<const std::pair<KeyDigest, BitPattern>> patterns,
                           const BuildConfig &cfg, BuildLog *log, uint32_t minLength) {
    VlBurr out;
    out.masked_ = true;
    size_t maxLen = minLength;
    uint64_t totalPositions = 0;
    uint64_t stored = 0;
    for (const auto &[d, pattern] : patterns) {
        maxLen = std::max(maxLen, pattern.size());
        totalPositions += pattern.size();
    }
    if (maxLen > 65535)
        throw Error(ErrorCode::InvalidArgument, "patterns longer than 65535 symbols");
    out.length_ = static_cast<uint32_t>(maxLen);
    std::vector<detail::BandingItem> items(patterns.size());
    detail::BandingArena arena;
    arena.resize(totalPositions);
    uint64_t offset = 0;
    for (size_t i = 0; i < patterns.size(); ++i) {
        const auto &[d, pattern] = patterns[i];
        items[i] = {d, static_cast<uint32_t>(pattern.size()), offset};
        for (size_t j = 0; j < pattern.size(); ++j) {
            if (pattern.ones[j]) {
                arena.set(offset + j, true, fingerprintBit(d, j));
                ++stored;
            }
        }
        offset += pattern.size();
    }
    out.storedBits_ = stored;
    if (maxLen == 0) {
        std::vector<uint64_t> ds;
        for (const auto &p : patterns)
            ds.push_back(p.first.value);
        checkDistinct(std::move(ds));
        out.store_.seed = cfg.seed;
        out.store_.width = cfg.width;
        out.store_.bucketSize = cfg.bucketSize;
        out.store_.ribbons = 0;
        if (log)
            log->assign(patterns.size(), 0);
        return out;
    }
    out.store_ = detail::band(items, arena, out.length_, cfg.seed, toBanding(cfg, true), log);
    return out;
}

BitStream VlBurr::queryStream(KeyDigest d) const {
    BitStream s;
    s.store_ = &store_;
    s.digest_ = d;
    s.length_ = length_;
    if (length_ > 0)
        s.resolved_ = store_.resolve(d);
    return s;
}

BitStream VlBurr::queryFilterStream(KeyDigest d) const {
    if (!masked_)
        throw Error(ErrorCode::InvalidArgument, "filter stream requested from a plain VL structure");
    BitStream s = queryStream(d);
    s.match_ = true;
    return s;
}

uint64_t VlBurr::sizeInBits() const { return 8 * serialize().size(); }

void VlBurr::serializeTo(detail::ByteWriter &out) const {
    store_.serialize(out, masked_ ? detail::StructureKind::VlMasked : detail::StructureKind::VlPlain,
                     storedBits_);
}

VlBurr VlBurr::deserializeFrom(detail::ByteReader &in) {
    // Peek the kind byte (after 4 magic + 2 version bytes) to pick the variant.
    detail::ByteReader peek = in;
    peek.raw(6);
    const auto kind = static_cast<detail::StructureKind>(peek.u8());
    if (kind != detail::StructureKind::VlPlain && kind != detail::StructureKind::VlMasked)
        throw Error(ErrorCode::BadMagic, "not a variable-length structure");
    VlBurr out;
    out.masked_ = kind == detail::StructureKind::VlMasked;
    out.store_ = detail::LayeredStore::deserialize(in, kind, &out.storedBits_);
    out.length_ = out.store_.ribbons;
    return out;
}

std::vector<std::byte> VlBurr::serialize() const {
    detail::ByteWriter w;
    serializeTo(w);
    return std::move(w).take();
}

VlBurr VlBurr::deserialize(std::span<const std::byte> bytes) {
    detail::ByteReader r(bytes);
    return deserializeFrom(r);
}

} // namespace lsfkit
