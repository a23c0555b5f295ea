// Serial vs OpenMP throughput for the data-parallel kernels.

#include <benchmark/benchmark.h>

#include "paretonas/evaluators.hpp"
#include "paretonas/kernels.hpp"

using namespace paretonas;

namespace {

std::vector<Chromosome> batch_of(std::size_t n) {
    const auto space = build_search_space();
    RandomStream rng(1);
    std::vector<Chromosome> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(random_chromosome(space, rng));
    return out;
}

std::vector<double> noisy(std::size_t n, std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform01();
    return v;
}

void BM_TauSerial(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = noisy(n, 1), y = noisy(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::kendall_tau_serial(x, y));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * (n - 1) / 2));
}

void BM_TauParallel(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto x = noisy(n, 1), y = noisy(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(kernels::kendall_tau_parallel(x, y));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * (n - 1) / 2));
}

void BM_CostsSerial(benchmark::State& state) {
    const auto space = build_search_space();
    const auto batch = batch_of(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::batch_costs_serial(batch, space));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CostsParallel(benchmark::State& state) {
    const auto space = build_search_space();
    const auto batch = batch_of(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::batch_costs_parallel(batch, space));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScoresSerial(benchmark::State& state) {
    const auto space = build_search_space();
    SurrogateEvaluator ev(space, 0);
    const kernels::ScoreFn fn = [&](const Chromosome& c) { return ev.evaluate(c); };
    const auto batch = batch_of(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::batch_scores_serial(batch, fn));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScoresParallel(benchmark::State& state) {
    const auto space = build_search_space();
    SurrogateEvaluator ev(space, 0);
    const kernels::ScoreFn fn = [&](const Chromosome& c) { return ev.evaluate(c); };
    const auto batch = batch_of(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::batch_scores_parallel(batch, fn));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_TauSerial)->Arg(200)->Arg(2000);
BENCHMARK(BM_TauParallel)->Arg(200)->Arg(2000);
BENCHMARK(BM_CostsSerial)->Arg(64)->Arg(1024);
BENCHMARK(BM_CostsParallel)->Arg(64)->Arg(1024);
BENCHMARK(BM_ScoresSerial)->Arg(64)->Arg(1024);
BENCHMARK(BM_ScoresParallel)->Arg(64)->Arg(1024);

BENCHMARK_MAIN();
