#include "lsfkit/detail/banding.hpp"

#include "lsfkit/error.hpp"
#include "lsfkit/ribbon.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstring>
#include <numeric>

namespace lsfkit::detail {

namespace {

// Starting positions for `load` rows at the configured overload: the fewest
// buckets of at most `bucketSize` starts, all of equal size.
uint64_t chooseStarts(uint64_t load, double overload, uint32_t bucketSize) {
    auto natural = static_cast<uint64_t>(std::ceil(static_cast<double>(load) / (1.0 + overload)));
    natural = std::max<uint64_t>(natural, 1);
    const uint64_t buckets = (natural + bucketSize - 1) / bucketSize;
    return buckets * ((natural + buckets - 1) / buckets);
}

struct Placed {
    uint32_t item;
    uint32_t offset;
    uint64_t bucket;
    uint64_t start;
    uint64_t coeffs;
    uint32_t firstRibbon;
};

struct LogEntry {
    uint32_t ribbon;
    uint32_t offset;
    uint64_t pivot;
};

// Builds one layer over `active`; returns the items that were bumped.
std::vector<uint32_t> buildLayer(LayeredStore &store, Layer &layer, size_t layerIndex,
                                 std::span<const BandingItem> items, const BandingArena &arena,
                                 const std::vector<uint32_t> &active, const BandingConfig &cfg,
                                 std::vector<int> *placement) {
    const uint32_t L = store.ribbons;
    const uint64_t seed = LayeredStore::layerSeed(store.seed, layerIndex);

    std::vector<Placed> placed(active.size());
    std::vector<uint64_t> loads(L, 0);
    for (size_t t = 0; t < active.size(); ++t) {
        const BandingItem &it = items[active[t]];
        const KeyDigest ld = layerDigest(it.digest, seed);
        placed[t].item = active[t];
        placed[t].firstRibbon = ribbonOffset(ld, L);
        for (uint32_t j = 0; j < it.length; ++j)
            if (arena.stored(it.bitOffset + j))
                ++loads[(placed[t].firstRibbon + j) % L];
    }
    const uint64_t maxLoad = *std::max_element(loads.begin(), loads.end());
    if (maxLoad == 0) {
        layer.m = 0;
        if (placement)
            for (uint32_t i : active)
                (*placement)[i] = static_cast<int>(layerIndex);
        return {};
    }

    const uint64_t numStarts = chooseStarts(maxLoad, cfg.overload, store.bucketSize);
    layer.m = numStarts + store.width - 1;
    const RibbonParams params = store.layerParams(layer);
    const uint64_t numBuckets = numStarts / params.bucketSize;
    layer.thresholds.assign(numBuckets, 0);

    for (size_t t = 0; t < active.size(); ++t) {
        const KeyDigest ld = layerDigest(items[active[t]].digest, seed);
        const RibbonParts parts = deriveParts(ld, params);
        placed[t].offset = parts.offset;
        placed[t].bucket = parts.bucket;
        placed[t].start = parts.start;
        placed[t].coeffs = parts.coeffs;
    }
    // Buckets in ascending order; within a bucket, descending offset so that a
    // conflict bumps exactly the keys at or below the conflicting offset.
    std::sort(placed.begin(), placed.end(), [&](const Placed &a, const Placed &b) {
        if (a.bucket != b.bucket)
            return a.bucket < b.bucket;
        if (a.offset != b.offset)
            return a.offset > b.offset;
        return items[a.item].digest < items[b.item].digest;
    });

    std::vector<RibbonSystem> systems;
    systems.reserve(L);
    for (uint32_t i = 0; i < L; ++i)
        systems.emplace_back(layer.m, store.width);

    std::vector<uint32_t> bumped;
    std::vector<LogEntry> log;
    size_t a = 0;
    while (a < placed.size()) {
        size_t e = a;
        while (e < placed.size() && placed[e].bucket == placed[a].bucket)
            ++e;
        log.clear();
        for (size_t t = a; t < e; ++t) {
            const Placed &p = placed[t];
            const BandingItem &it = items[p.item];
            bool conflict = false;
            for (uint32_t j = 0; j < it.length && !conflict; ++j) {
                const uint64_t bit = it.bitOffset + j;
                if (!arena.stored(bit))
                    continue;
                const uint32_t ribbon = (p.firstRibbon + j) % L;
                uint64_t pivot = 0;
                switch (systems[ribbon].insert(p.start, p.coeffs, arena.rhsBit(bit), &pivot)) {
                case InsertResult::Inserted:
                    log.push_back({ribbon, p.offset, pivot});
                    break;
                case InsertResult::Redundant:
                    break;
                case InsertResult::Conflict:
                    conflict = true;
                    break;
                }
            }
            if (!conflict)
                continue;
            const uint32_t cut = p.offset;
            layer.thresholds[p.bucket] = static_cast<uint16_t>(cut + 1);
            while (!log.empty() && log.back().offset <= cut) {
                systems[log.back().ribbon].retract(log.back().pivot);
                log.pop_back();
            }
            size_t first = t;
            while (first > a && placed[first - 1].offset <= cut)
                --first;
            for (size_t u = first; u < e; ++u)
                bumped.push_back(placed[u].item);
            for (size_t u = a; u < first; ++u)
                if (placement)
                    (*placement)[placed[u].item] = static_cast<int>(layerIndex);
            break;
        }
        if (placement && layer.thresholds[placed[a].bucket] == 0)
            for (size_t u = a; u < e; ++u)
                (*placement)[placed[u].item] = static_cast<int>(layerIndex);
        a = e;
    }

    const uint64_t wordsPer = store.wordsPerRibbon(layer);
    layer.words.assign(wordsPer * L, 0);
    for (uint32_t i = 0; i < L; ++i) {
        const uint64_t fillSeed = remix(seed, 0x100000 + i);
        const std::vector<uint64_t> z = systems[i].backSubstitute(cfg.randomFill, fillSeed);
        for (uint64_t j = 0; j < wordsPer; ++j)
            layer.words[j * L + i] = z[j];
    }
    return bumped;
}

} // namespace

RibbonParams LayeredStore::layerParams(const Layer &layer) const noexcept {
    RibbonParams p;
    p.m = layer.m;
    p.w = width;
    p.ribbons = ribbons;
    const uint64_t starts = layer.m - width + 1;
    p.bucketSize = static_cast<uint32_t>(starts / ((starts + bucketSize - 1) / bucketSize));
    return p;
}

LayeredStore::Resolved LayeredStore::resolve(KeyDigest d) const noexcept {
    Resolved r;
    for (size_t i = 0; i < layers.size(); ++i) {
        const Layer &layer = layers[i];
        const KeyDigest ld = layerDigest(d, layerSeed(seed, i));
        if (layer.m == 0) {
            r.layer = static_cast<int>(i);
            r.firstRibbon = ribbonOffset(ld, ribbons);
            return r;
        }
        const RibbonParts parts = deriveParts(ld, layerParams(layer));
        if (parts.offset < layer.thresholds[parts.bucket])
            continue;
        r.layer = static_cast<int>(i);
        r.start = parts.start;
        r.coeffs = parts.coeffs;
        r.firstRibbon = ribbonOffset(ld, ribbons);
        return r;
    }
    auto it = std::lower_bound(fallbackDigests.begin(), fallbackDigests.end(), d.value);
    if (it != fallbackDigests.end() && *it == d.value) {
        r.layer = -1;
        r.fallbackIndex = static_cast<size_t>(it - fallbackDigests.begin());
    }
    return r;
}

bool LayeredStore::rawBit(const Resolved &r, uint32_t position) const noexcept {
    if (r.layer == -1) {
        const uint64_t *entry = fallbackWords.data() + r.fallbackIndex * wordsPerEntry();
        return (entry[position / 64] >> (position % 64)) & 1U;
    }
    if (r.layer < 0)
        return false;
    const Layer &layer = layers[static_cast<size_t>(r.layer)];
    if (layer.m == 0)
        return false;
    const uint32_t ribbon = (r.firstRibbon + position) % ribbons;
    const uint64_t wordsPer = wordsPerRibbon(layer);
    const uint64_t idx = r.start / 64;
    const unsigned shift = r.start % 64;
    uint64_t window = layer.words[idx * ribbons + ribbon] >> shift;
    if (shift != 0 && idx + 1 < wordsPer)
        window |= layer.words[(idx + 1) * ribbons + ribbon] << (64 - shift);
    return std::popcount(window & r.coeffs) & 1;
}

std::vector<uint64_t> LayeredStore::touchedWords(const Resolved &r) const {
    std::vector<uint64_t> out;
    if (r.layer < 0)
        return out;
    const Layer &layer = layers[static_cast<size_t>(r.layer)];
    if (layer.m == 0)
        return out;
    const uint64_t wordsPer = wordsPerRibbon(layer);
    const uint64_t idx = r.start / 64;
    for (uint32_t pos = 0; pos < ribbons; ++pos) {
        const uint32_t ribbon = (r.firstRibbon + pos) % ribbons;
        out.push_back(idx * ribbons + ribbon);
        if (r.start % 64 != 0 && idx + 1 < wordsPer)
            out.push_back((idx + 1) * ribbons + ribbon);
    }
    return out;
}

uint64_t LayeredStore::payloadBits() const noexcept {
    uint64_t bits = 0;
    for (const Layer &layer : layers)
        bits += 64 * layer.words.size();
    return bits + 64 * fallbackWords.size();
}

void LayeredStore::serialize(ByteWriter &out, StructureKind kind, uint64_t storedBits) const {
    out.raw(std::as_bytes(std::span(kMagic)));
    out.u16(kFormatVersion);
    out.u8(static_cast<uint8_t>(kind));
    out.u64(seed);
    out.u8(static_cast<uint8_t>(width));
    out.u32(bucketSize);
    out.u8(static_cast<uint8_t>(layers.size()));
    const bool variable = kind != StructureKind::Burr;
    if (variable) {
        out.u16(static_cast<uint16_t>(ribbons));
        out.u64(storedBits);
    }
    for (const Layer &layer : layers) {
        out.u64(layer.m);
        for (uint16_t t : layer.thresholds)
            out.u16(t);
        out.words(layer.words);
    }
    out.u64(fallbackDigests.size());
    for (size_t i = 0; i < fallbackDigests.size(); ++i) {
        out.u64(fallbackDigests[i]);
        if (variable) {
            out.words(std::span(fallbackWords).subspan(i * wordsPerEntry(), wordsPerEntry()));
        } else {
            out.u8(static_cast<uint8_t>(fallbackWords[i] & 1U));
        }
    }
}

LayeredStore LayeredStore::deserialize(ByteReader &in, StructureKind kind, uint64_t *storedBits) {
    auto magic = in.raw(4);
    if (std::memcmp(magic.data(), kMagic, 4) != 0)
        throw Error(ErrorCode::BadMagic, "expected LSF1 container");
    const uint16_t version = in.u16();
    if (version != kFormatVersion)
        throw Error(ErrorCode::VersionMismatch, "format version " + std::to_string(version));
    const auto gotKind = static_cast<StructureKind>(in.u8());
    if (gotKind != kind)
        throw Error(ErrorCode::BadMagic, "unexpected structure kind " +
                                             std::to_string(static_cast<int>(gotKind)));
    LayeredStore s;
    s.seed = in.u64();
    s.width = in.u8();
    s.bucketSize = in.u32();
    const size_t layerCount = in.u8();
    if (s.width < 1 || s.width > 64 || s.bucketSize == 0)
        throw Error(ErrorCode::BadMagic, "invalid ribbon geometry");
    const bool variable = kind != StructureKind::Burr;
    uint64_t bits = 0;
    if (variable) {
        s.ribbons = in.u16();
        bits = in.u64();
        if (s.ribbons == 0 && layerCount > 0)
            throw Error(ErrorCode::BadMagic, "zero ribbons with layers");
    }
    if (storedBits)
        *storedBits = bits;
    s.layers.resize(layerCount);
    for (Layer &layer : s.layers) {
        layer.m = in.u64();
        if (layer.m == 0)
            continue;
        if (layer.m < s.width)
            throw Error(ErrorCode::BadMagic, "layer smaller than ribbon width");
        const RibbonParams p = s.layerParams(layer);
        if (p.numStarts() % p.bucketSize != 0)
            throw Error(ErrorCode::BadMagic, "layer size not a whole number of buckets");
        const uint64_t numBuckets = p.numStarts() / p.bucketSize;
        if (numBuckets > in.remaining() / 2)
            throw Error(ErrorCode::TruncatedInput, "threshold array");
        layer.thresholds.resize(numBuckets);
        for (auto &t : layer.thresholds)
            t = in.u16();
        layer.words = in.words(s.wordsPerRibbon(layer) * s.ribbons);
    }
    const uint64_t count = in.u64();
    if (count > in.remaining() / 9)
        throw Error(ErrorCode::TruncatedInput, "fallback entries");
    s.fallbackDigests.resize(count);
    for (uint64_t i = 0; i < count; ++i) {
        s.fallbackDigests[i] = in.u64();
        if (variable) {
            auto ws = in.words(s.wordsPerEntry());
            s.fallbackWords.insert(s.fallbackWords.end(), ws.begin(), ws.end());
        } else {
            s.fallbackWords.push_back(in.u8() & 1U);
        }
    }
    return s;
}

LayeredStore band(std::span<const BandingItem> items, const BandingArena &arena, uint32_t ribbons,
                  uint64_t seed, const BandingConfig &cfg, std::vector<int> *placement) {
    {
        std::vector<uint64_t> ds(items.size());
        for (size_t i = 0; i < items.size(); ++i)
            ds[i] = items[i].digest.value;
        std::sort(ds.begin(), ds.end());
        if (std::adjacent_find(ds.begin(), ds.end()) != ds.end())
            throw Error(ErrorCode::DuplicateDigest, "two keys share a 64-bit digest");
    }
    LayeredStore store;
    store.seed = seed;
    store.width = cfg.width;
    store.bucketSize = cfg.bucketSize;
    store.ribbons = std::max<uint32_t>(ribbons, 1);
    if (placement)
        placement->assign(items.size(), -1);
    if (items.empty())
        return store;

    std::vector<uint32_t> active(items.size());
    std::iota(active.begin(), active.end(), 0U);
    for (uint32_t layerIndex = 0; layerIndex < cfg.maxLayers && !active.empty(); ++layerIndex) {
        store.layers.emplace_back();
        active = buildLayer(store, store.layers.back(), layerIndex, items, arena, active, cfg,
                            placement);
    }
    if (active.size() > cfg.fallbackCap)
        throw Error(ErrorCode::ConstructionFailed,
                    std::to_string(active.size()) + " keys left after all layers");

    std::sort(active.begin(), active.end(), [&](uint32_t a, uint32_t b) {
        return items[a].digest < items[b].digest;
    });
    const uint64_t wpe = store.wordsPerEntry();
    for (uint32_t i : active) {
        const BandingItem &it = items[i];
        store.fallbackDigests.push_back(it.digest.value);
        std::vector<uint64_t> raw(wpe, 0);
        for (uint32_t j = 0; j < it.length; ++j) {
            const uint64_t bit = it.bitOffset + j;
            if (arena.stored(bit) && arena.rhsBit(bit))
                raw[j / 64] |= uint64_t{1} << (j % 64);
        }
        store.fallbackWords.insert(store.fallbackWords.end(), raw.begin(), raw.end());
    }
    return store;
}

} // namespace lsfkit::detail
