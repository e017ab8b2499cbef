#include "lsfkit/datasets.hpp"
#include "lsfkit/lsf.hpp"

#include <benchmark/benchmark.h>

namespace {

const lsfkit::Dataset &data() {
    static const lsfkit::Dataset ds = lsfkit::genGauss(200000, 1.0, 42);
    return ds;
}

lsfkit::Lsf buildGnb() {
    const auto &ds = data();
    return lsfkit::Lsf::build(ds.keys, ds.features, ds.labels, ds.valueNames,
                              lsfkit::gnbFit(ds.features, ds.labels, ds.classes()), ds.prep);
}

void BM_LsfBuild(benchmark::State &state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(buildGnb());
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(data().size()));
}
BENCHMARK(BM_LsfBuild)->Unit(benchmark::kMillisecond);

void BM_LsfQuery(benchmark::State &state) {
    const auto &ds = data();
    const auto lsf = buildGnb();
    lsfkit::QueryOptions opt;
    opt.forceSlowPath = state.range(0) != 0;
    size_t i = 0;
    for (auto _ : state) {
        const size_t k = i++ % ds.size();
        benchmark::DoNotOptimize(lsf.query(ds.keys[k], ds.features.row(k), opt));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LsfQuery)->ArgName("slow")->Arg(0)->Arg(1);

void BM_CsfQuery(benchmark::State &state) {
    const auto &ds = data();
    const auto csf = lsfkit::Lsf::buildCsf(ds.keys, ds.labels, ds.valueNames);
    size_t i = 0;
    for (auto _ : state)
        benchmark::DoNotOptimize(csf.query(ds.keys[i++ % ds.size()], {}));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CsfQuery);

} // namespace
