#include <benchmark/benchmark.h>

#include "wlancap/analytic.hpp"
#include "wlancap/capacity.hpp"
#include "wlancap/delay.hpp"
#include "wlancap/simulator.hpp"

using namespace wlancap;

namespace {

void BM_Throughput(benchmark::State& state) {
    const auto s = reference_scenario(AccessModel::Basic, static_cast<int>(state.range(0)));
    double tau = 0.01;
    for (auto _ : state) {
        benchmark::DoNotOptimize(throughput(tau, s));
        tau = tau < 0.02 ? tau + 1e-7 : 0.01;
    }
}
BENCHMARK(BM_Throughput)->Arg(10)->Arg(50)->Arg(200);

void BM_SaturationTau(benchmark::State& state) {
    const auto s = reference_scenario(AccessModel::Basic, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(saturation_tau(s));
}
BENCHMARK(BM_SaturationTau)->Arg(10)->Arg(50)->Arg(200);

void BM_CapacityReport(benchmark::State& state) {
    const auto s = reference_scenario(AccessModel::EqualSlot, 50, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(capacity_report(s));
}
BENCHMARK(BM_CapacityReport)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_DelayStats(benchmark::State& state) {
    const auto s = reference_scenario(AccessModel::EqualSlot).with_offered_load(60.0);
    const double tau = stable_operating_point(s).tau;
    for (auto _ : state) benchmark::DoNotOptimize(delay_stats(s, tau));
}
BENCHMARK(BM_DelayStats);

// Reports simulated slots per second as items/s.
void BM_SimulatorSlots(benchmark::State& state) {
    const double load = static_cast<double>(state.range(0));
    const auto s = reference_scenario(AccessModel::EqualSlot).with_offered_load(load);
    SimConfig c;
    c.total_slots = 200'000;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run(s, c).delivered);
        ++c.seed;
    }
    state.SetItemsProcessed(state.iterations() * c.total_slots);
}
BENCHMARK(BM_SimulatorSlots)->Arg(30)->Arg(90)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
