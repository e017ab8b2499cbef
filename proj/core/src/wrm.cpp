#include "lsfkit/error.hpp"
#include "lsfkit/lsf.hpp"

#include <algorithm>
#include <cmath>

namespace lsfkit {

uint32_t filterLength(double p, bool randomized, double coin) noexcept {
    if (!randomized)
        return optimalBitLength(p);
    const double r = std::min(optimalRealBitLength(p), 64.0);
    const double lo = std::floor(r);
    return static_cast<uint32_t>(lo) + (coin < r - lo ? 1U : 0U);
}

bool Wrm::filterMatch(KeyDigest d, uint32_t r) const {
    if (r > filter_.ribbons())
        return false;
    BitStream s = filter_.queryFilterStream(d);
    return s.readAllOnes(r);
}

Wrm Wrm::build(std::span<const KeyDigest> keys, std::span<const char> member, std::span<const double> weights,
               const BuildConfig &cfg) {
    if (keys.size() != member.size() || keys.size() != weights.size())
        throw Error(ErrorCode::DimensionMismatch, "keys, memberships and weights differ in length");
    std::vector<uint32_t> r(keys.size());
    uint32_t maxR = 0;
    for (size_t i = 0; i < keys.size(); ++i) {
        if (!(weights[i] >= 0.0 && weights[i] <= 0.5))
            throw Error(ErrorCode::WeightOutOfRange, "weight " + std::to_string(weights[i]) + " not in [0, 1/2]");
        r[i] = optimalBitLength(weights[i]);
        maxR = std::max(maxR, r[i]);
    }

    std::vector<std::pair<KeyDigest, BitPattern>> patterns;
    for (size_t i = 0; i < keys.size(); ++i) {
        if (!member[i])
            continue;
        BitPattern p;
        p.appendOne(r[i]);
        patterns.emplace_back(keys[i], std::move(p));
    }
    Wrm out;
    BuildConfig fcfg = cfg;
    fcfg.seed = remix(cfg.seed, 101);
    out.filter_ = VlBurr::buildFilter(patterns, fcfg, nullptr, maxR);

    std::vector<std::pair<KeyDigest, bool>> corrections;
    for (size_t i = 0; i < keys.size(); ++i) {
        if (member[i]) {
            corrections.emplace_back(keys[i], true);
        } else if (out.filterMatch(keys[i], r[i])) {
            corrections.emplace_back(keys[i], false);
        }
    }
    out.positives_ = corrections.size();
    BuildConfig ccfg = cfg;
    ccfg.seed = remix(cfg.seed, 102);
    out.correction_ = BurrSf::build(corrections, ccfg);
    return out;
}

bool Wrm::query(KeyDigest d, double weight) const {
    if (!filterMatch(d, optimalBitLength(std::clamp(weight, 0.0, 0.5))))
        return false;
    return correction_.query(d);
}

} // namespace lsfkit
