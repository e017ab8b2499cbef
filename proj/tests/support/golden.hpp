#pragma once

#include "lsfkit/datasets.hpp"
#include "lsfkit/lsf.hpp"

#include "test_support.hpp"

#include <string>

namespace lsfkit::test {

inline constexpr const char *kGoldenLsfFile = "golden_gauss_gnb.lsf";
inline constexpr const char *kGoldenVlFile = "golden_vl.bin";

inline const Dataset &goldenDataset() {
    static const Dataset ds = genGauss(10000, 1.0, 42);
    return ds;
}

// gauss sigma=1, 10^4 keys, generator seed 42, GNB, default build settings.
inline Lsf goldenLsf() {
    const Dataset &ds = goldenDataset();
    return Lsf::build(ds.keys, ds.features, ds.labels, ds.valueNames,
                      gnbFit(ds.features, ds.labels, ds.classes()), ds.prep);
}

inline std::vector<std::pair<KeyDigest, BitString>> goldenVlPairs() {
    Rng rng(2024);
    std::vector<std::pair<KeyDigest, BitString>> pairs;
    for (int i = 0; i < 2000; ++i) {
        BitString s;
        const auto len = rng.below(13);
        for (uint64_t j = 0; j < len; ++j)
            s.push(rng.coin());
        pairs.emplace_back(digest("vl-" + std::to_string(i), 5), std::move(s));
    }
    return pairs;
}

inline VlBurr goldenVl() {
    BuildConfig cfg;
    cfg.bucketSize = 64;
    return VlBurr::build(goldenVlPairs(), cfg);
}

} // namespace lsfkit::test
