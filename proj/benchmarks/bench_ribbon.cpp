#include "lsfkit/hashing.hpp"
#include "lsfkit/ribbon.hpp"
#include "lsfkit/vlsf.hpp"

#include <benchmark/benchmark.h>

#include <string>
#include <utility>
#include <vector>

namespace {

std::vector<std::pair<lsfkit::KeyDigest, bool>> bitPairs(size_t n) {
    std::vector<std::pair<lsfkit::KeyDigest, bool>> pairs;
    pairs.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        const auto d = lsfkit::digest("k" + std::to_string(i), 1);
        pairs.emplace_back(d, d.value & 1U);
    }
    return pairs;
}

void BM_BurrBuild(benchmark::State &state) {
    const auto pairs = bitPairs(static_cast<size_t>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(lsfkit::BurrSf::build(pairs));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BurrBuild)->Arg(10000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_BurrQuery(benchmark::State &state) {
    const auto pairs = bitPairs(static_cast<size_t>(state.range(0)));
    const auto sf = lsfkit::BurrSf::build(pairs);
    size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(sf.query(pairs[i++ % pairs.size()].first));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BurrQuery)->Arg(10000)->Arg(1000000);

void BM_VlStreamRead(benchmark::State &state) {
    const size_t n = 200000;
    std::vector<std::pair<lsfkit::KeyDigest, lsfkit::BitString>> pairs;
    for (size_t i = 0; i < n; ++i) {
        const auto d = lsfkit::digest("v" + std::to_string(i), 2);
        lsfkit::BitString s;
        for (uint64_t j = 0; j < d.value % 6; ++j)
            s.push((d.value >> (8 + j)) & 1U);
        pairs.emplace_back(d, std::move(s));
    }
    const auto vl = lsfkit::VlBurr::build(pairs);
    size_t i = 0;
    for (auto _ : state) {
        const auto &[d, v] = pairs[i++ % n];
        auto s = vl.queryStream(d);
        for (size_t j = 0; j < v.size(); ++j)
            benchmark::DoNotOptimize(s.next());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_VlStreamRead);

} // namespace
