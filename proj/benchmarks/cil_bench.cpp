#include "cil/dual.hpp"
#include "cil/interface.hpp"

#include <benchmark/benchmark.h>

using namespace cil;

namespace {

Window centered(int half, double t) { return Window{-half, half, t}; }

void BM_SampleWindow(benchmark::State& state) {
    const double t = static_cast<double>(state.range(0));
    const Window w = centered(WindowPolicy::for_rates(Rates{}).half_width(t), t);
    std::uint64_t seed = 0;
    std::size_t events = 0;
    for (auto _ : state) {
        const auto h = sample_window(Rates{}, w, ++seed);
        events += h.events().size();
        benchmark::DoNotOptimize(h);
    }
    state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SampleWindow)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Heaviside(benchmark::State& state) {
    const double t = static_cast<double>(state.range(0));
    const auto policy = WindowPolicy::for_rates(Rates{});
    const auto h = sample_window(Rates{}, centered(policy.half_width(t), t), 1);
    const double times[] = {t};
    for (auto _ : state) benchmark::DoNotOptimize(run_heaviside(h, times, policy));
    state.counters["events/s"] = benchmark::Counter(static_cast<double>(h.events().size()),
                                                    benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_Heaviside)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_ReachSweep(benchmark::State& state) {
    const double t = static_cast<double>(state.range(0));
    const auto h = sample_window(Rates{}, centered(DualWindow{}.half_width(t), t), 2);
    for (auto _ : state) benchmark::DoNotOptimize(reach_sweep(h, t));
    state.counters["events/s"] = benchmark::Counter(static_cast<double>(h.events().size()),
                                                    benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_ReachSweep)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_AncestorProcess(benchmark::State& state) {
    const double t = static_cast<double>(state.range(0));
    const auto h = sample_window(Rates{}, centered(DualWindow{}.half_width(t), t), 3);
    for (auto _ : state) benchmark::DoNotOptimize(ancestor_process(h, 0, 0.0, t));
    state.counters["events/s"] = benchmark::Counter(static_cast<double>(h.events().size()),
                                                    benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_AncestorProcess)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_AncestorMap(benchmark::State& state) {
    const double t = static_cast<double>(state.range(0));
    const auto h = sample_window(Rates{}, centered(40, t), 4);
    for (auto _ : state) benchmark::DoNotOptimize(ancestor_map(h, t));
}
BENCHMARK(BM_AncestorMap)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_SplitSurvival(benchmark::State& state) {
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(split_survival(Rates{}, 400.0, ++seed));
}
BENCHMARK(BM_SplitSurvival)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
