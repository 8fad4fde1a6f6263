// SPDX-License-Identifier: Apache-2.0
//
// Serial reference kernels against their OpenMP counterparts.
#include "risobf/harness.hpp"

#include <benchmark/benchmark.h>

using namespace risobf;

namespace {

ExperimentSpec desk_spec(int realizations) {
    ExperimentSpec spec;
    spec.scenario.M = 2;
    spec.scenario.Nx = 4;
    spec.scenario.Ny = 4;
    spec.scenario.K = 2;
    spec.scenario.sensingAzPoints = 2;
    spec.scenario.sensingElPoints = 2;
    spec.scenario.normalize();
    spec.realizations = realizations;
    return spec;
}

struct Converged {
    RunResult run;
    ScenarioConfig cfg;
};

const Converged& converged() {
    static const Converged c = [] {
        const ExperimentSpec spec = desk_spec(1);
        return Converged{run_main(spec.scenario, spec.settings), spec.scenario};
    }();
    return c;
}

void BM_ExperimentSerial(benchmark::State& st) {
    const ExperimentSpec spec = desk_spec(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(run_experiment_serial(spec));
}

void BM_ExperimentOpenMP(benchmark::State& st) {
    const ExperimentSpec spec = desk_spec(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(run_experiment(spec));
}

void BM_HeatmapSerial(benchmark::State& st) {
    const auto& c = converged();
    const HeatmapGrid g{static_cast<int>(st.range(0)), static_cast<int>(st.range(0))};
    for (auto _ : st) {
        benchmark::DoNotOptimize(heatmap_serial(c.run.state, c.run.scenario.channels, c.run.partition, c.cfg, g, 10));
    }
}

void BM_HeatmapOpenMP(benchmark::State& st) {
    const auto& c = converged();
    const HeatmapGrid g{static_cast<int>(st.range(0)), static_cast<int>(st.range(0))};
    for (auto _ : st) {
        benchmark::DoNotOptimize(heatmap(c.run.state, c.run.scenario.channels, c.run.partition, c.cfg, g, 10));
    }
}

void BM_OracleSerial(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(detection_oracle_serial(1.0, 2.0, 1.3863, 10, st.range(0), 7));
}

void BM_OracleOpenMP(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(detection_oracle(1.0, 2.0, 1.3863, 10, st.range(0), 7));
}

}  // namespace

BENCHMARK(BM_ExperimentSerial)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExperimentOpenMP)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HeatmapSerial)->Arg(21)->Arg(51)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_HeatmapOpenMP)->Arg(21)->Arg(51)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_OracleSerial)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OracleOpenMP)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
