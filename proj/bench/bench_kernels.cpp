// Serial reference loops against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "leakage/fixture.hpp"
#include "leakage/kernels.hpp"

using namespace leakage;

namespace {

const traffic::IntervalModel kModel{10, 1.0, 20.0, 0.3};

obfuscator::Strategy strategy() {
    obfuscator::Strategy s;
    s.waterfill_prob = 0.6;
    s.fake_prob = 0.4;
    return s;
}

template <auto Generate>
void bm_generate(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(Generate(kModel, n, 1));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Obfuscate>
void bm_obfuscate(benchmark::State& state) {
    const auto base = kernels::serial::generate(kModel, static_cast<std::size_t>(state.range(0)), 1);
    const auto cost = obfuscator::costs(kModel);
    for (auto _ : state) {
        state.PauseTiming();
        auto run = base;
        state.ResumeTiming();
        Obfuscate(run, strategy(), {}, cost, 2);
        benchmark::DoNotOptimize(run);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Verdicts>
void bm_verdicts(benchmark::State& state) {
    const auto run = kernels::serial::generate(kModel, static_cast<std::size_t>(state.range(0)), 1);
    attacker::DetectorConfig cfg{attacker::DetectorMode::chi_square, 0.05, kModel.anomaly_rate};
    for (auto _ : state) benchmark::DoNotOptimize(Verdicts(run, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <auto Samples>
void bm_trace_samples(benchmark::State& state) {
    const auto f = trace::load_fixture(LEAKAGE_FIXTURE_DIR "/bernoulli_bursts.json");
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(Samples(f.prior, f.mechanism, &f.distance, n, 3));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(bm_generate<kernels::serial::generate>)->Name("generate/serial")->Arg(100000);
BENCHMARK(bm_generate<kernels::omp::generate>)->Name("generate/omp")->Arg(100000);
BENCHMARK(bm_obfuscate<kernels::serial::obfuscate>)->Name("obfuscate/serial")->Arg(100000);
BENCHMARK(bm_obfuscate<kernels::omp::obfuscate>)->Name("obfuscate/omp")->Arg(100000);
BENCHMARK(bm_verdicts<kernels::serial::verdicts>)->Name("verdicts/serial")->Arg(100000);
BENCHMARK(bm_verdicts<kernels::omp::verdicts>)->Name("verdicts/omp")->Arg(100000);
BENCHMARK(bm_trace_samples<kernels::serial::trace_samples>)->Name("trace_samples/serial")->Arg(20000);
BENCHMARK(bm_trace_samples<kernels::omp::trace_samples>)->Name("trace_samples/omp")->Arg(20000);

BENCHMARK_MAIN();
