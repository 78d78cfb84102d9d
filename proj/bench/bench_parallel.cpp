// Parallel kernels against their single-threaded references.

#include "lionmdp/analysis.hpp"
#include "lionmdp/simulator.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace lionmdp;

SimConfig bench_config(std::size_t replications) {
    SimConfig cfg;
    cfg.seed = 7;
    cfg.horizon = horizon_for(0.9);
    cfg.replications = replications;
    return cfg;
}

void BM_ReplicationsParallel(benchmark::State& state) {
    const LionParams p;
    const auto controller = Controller::fixed(always_stay_policy(p.K));
    const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(run_replications(p, controller, cfg).mean_return);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ReplicationsSerial(benchmark::State& state) {
    const LionParams p;
    const auto controller = Controller::fixed(always_stay_policy(p.K));
    const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(run_replications_serial(p, controller, cfg).mean_return);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

SweepSpec alpha_sweep(int K) {
    SweepSpec spec;
    spec.base.K = K;
    spec.kind = SweepKind::Alpha;
    spec.grid = parse_grid("0.01:0.99:0.01");
    return spec;
}

void BM_SweepParallel(benchmark::State& state) {
    const auto spec = alpha_sweep(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sweep(spec).size());
}

void BM_SweepSerial(benchmark::State& state) {
    const auto spec = alpha_sweep(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sweep_serial(spec).size());
}

void BM_KernelEstimate(benchmark::State& state) {
    const LionParams p;
    for (auto _ : state)
        benchmark::DoNotOptimize(
            estimate_transition_frequencies(p, LionState::success(1), LionAction::ST, state.range(0), 3).success);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_ReplicationsParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicationsSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSerial)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KernelEstimate)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
