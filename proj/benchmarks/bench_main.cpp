#include <benchmark/benchmark.h>

#include "abba/bootstrap.hpp"
#include "abba/counts.hpp"
#include "abba/simulator.hpp"

namespace {

abba::AbbaSimConfig config(std::uint64_t streams, std::uint64_t labeled) {
  abba::AbbaSimConfig c;
  c.n_streams = streams;
  c.n_labeled = labeled;
  c.seed = 1;
  return c;
}

void BM_SimulateAbba(benchmark::State& state) {
  const auto c = config(static_cast<std::uint64_t>(state.range(0)), 500);
  for (auto _ : state) benchmark::DoNotOptimize(abba::simulate_abba(c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateAbba)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_BuildCounts(benchmark::State& state) {
  const auto sim = abba::simulate_abba(config(static_cast<std::uint64_t>(state.range(0)), 500));
  for (auto _ : state) benchmark::DoNotOptimize(abba::build_counts(sim.dataset, {0.5, 0.5}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(sim.dataset.size()));
}
BENCHMARK(BM_BuildCounts)->Arg(10'000)->Arg(100'000);

void BM_Bootstrap(benchmark::State& state) {
  const auto sim = abba::simulate_abba(config(100'000, 5'000));
  const auto estimator = static_cast<abba::Estimator>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(abba::bootstrap_ci(sim.dataset, {0.5, 0.5}, estimator, {7, 1000, 0.95}));
}
BENCHMARK(BM_Bootstrap)
    ->Arg(static_cast<int>(abba::Estimator::rrecall_direct))
    ->Arg(static_cast<int>(abba::Estimator::rfpr_approx))
    ->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
