#include "lsfkit/hashing.hpp"

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

namespace {

void BM_Digest(benchmark::State &state) {
    std::vector<std::string> keys;
    for (int i = 0; i < 1024; ++i)
        keys.push_back("user-" + std::to_string(i * 7919) + std::string(state.range(0), 'x'));
    size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(lsfkit::digest(keys[i++ & 1023], 42));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Digest)->Arg(0)->Arg(16)->Arg(64);

void BM_Remix(benchmark::State &state) {
    uint64_t d = 1;
    for (auto _ : state) {
        d = lsfkit::remix(d, 3);
        benchmark::DoNotOptimize(d);
    }
}
BENCHMARK(BM_Remix);

} // namespace
