#include <benchmark/benchmark.h>

#include <strengthlab/fixtures.hpp>

using namespace strengthlab;

static void BM_InternalStrengthFixture(benchmark::State& state) {
    const auto fx = generator_vs_clinician_fixture();
    const auto f = fx.family("generator", 0.5);
    const auto g = fx.family("clinician", 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(internal_strength(f, g, fx.store, fx.refset).relation);
}
BENCHMARK(BM_InternalStrengthFixture);

static void BM_ReasoningMethodAcrossGrid(benchmark::State& state) {
    const auto fx = build_ledger_fixture();
    for (auto _ : state)
        for (double l : fx.grid)
            benchmark::DoNotOptimize(
                best_reasoning_method(fx.family("fiducial", l), fx.store, "fiducial", "bayesian", fx.refset).relation);
}
BENCHMARK(BM_ReasoningMethodAcrossGrid);
