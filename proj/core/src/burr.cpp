#include "lsfkit/ribbon.hpp"

#include "lsfkit/error.hpp"

namespace lsfkit {

namespace {

detail::BandingConfig bandingConfig(const BuildConfig &cfg) {
    if (cfg.width < 1 || cfg.width > 64 || cfg.bucketSize == 0 || cfg.bucketSize > 65535 ||
        cfg.maxLayers == 0 || cfg.maxLayers > 255 || !(cfg.overload > -1.0))
        throw Error(ErrorCode::InvalidArgument, "invalid ribbon build configuration");
    detail::BandingConfig b;
    b.overload = cfg.overload;
    b.maxLayers = cfg.maxLayers;
    b.bucketSize = cfg.bucketSize;
    b.width = cfg.width;
    b.fallbackCap = cfg.fallbackCap;
    return b;
}

} // namespace

BurrSf BurrSf::build(std::span<const std::pair<KeyDigest, bool>> pairs, const BuildConfig &cfg,
                     BuildLog *log) {
    std::vector<detail::BandingItem> items(pairs.size());
    detail::BandingArena arena;
    arena.resize(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        items[i] = {pairs[i].first, 1, i};
        arena.set(i, true, pairs[i].second);
    }
    return BurrSf(detail::band(items, arena, 1, cfg.seed, bandingConfig(cfg), log));
}

bool BurrSf::query(KeyDigest d) const noexcept {
    return store_.rawBit(store_.resolve(d), 0);
}

int BurrSf::resolveLayer(KeyDigest d) const noexcept { return store_.resolve(d).layer; }

uint64_t BurrSf::sizeInBits() const { return 8 * serialize().size(); }

void BurrSf::serializeTo(detail::ByteWriter &out) const {
    store_.serialize(out, detail::StructureKind::Burr, 0);
}

BurrSf BurrSf::deserializeFrom(detail::ByteReader &in) {
    return BurrSf(detail::LayeredStore::deserialize(in, detail::StructureKind::Burr, nullptr));
}

std::vector<std::byte> BurrSf::serialize() const {
    detail::ByteWriter w;
    serializeTo(w);
    return std::move(w).take();
}

BurrSf BurrSf::deserialize(std::span<const std::byte> bytes) {
    detail::ByteReader r(bytes);
    return deserializeFrom(r);
}

} // namespace lsfkit
