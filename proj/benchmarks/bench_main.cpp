#include <benchmark/benchmark.h>

#include "tradeband/band_solver.hpp"
#include "tradeband/dp_oracle.hpp"
#include "tradeband/policy_sim.hpp"
#include "tradeband/special_functions.hpp"

namespace tb = tradeband;

namespace {

const tb::OuParams kDesk{0.01, 0.01};

void BM_Dawson(benchmark::State& state) {
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tb::dawson(x));
    x = x < 30 ? x * 1.07 : 0.1;
  }
}
BENCHMARK(BM_Dawson);

void BM_GFunction(benchmark::State& state) {
  const double q1 = static_cast<double>(state.range(0)) / 4.0;
  for (auto _ : state) benchmark::DoNotOptimize(tb::g_function(q1, q1 - 1.5));
}
BENCHMARK(BM_GFunction)->Arg(0)->Arg(4)->Arg(16);

void BM_SolveP2(benchmark::State& state) {
  const auto costs = tb::costs_for_ratio(0.1, kDesk);
  const double p = state.range(0) * tb::stationary_std(kDesk);
  for (auto _ : state) benchmark::DoNotOptimize(tb::solve_p2(p, kDesk, costs));
}
BENCHMARK(BM_SolveP2)->Arg(0)->Arg(2)->Arg(8);

void BM_BandCurve(benchmark::State& state) {
  const auto costs = tb::costs_for_ratio(0.1, kDesk);
  const auto grid = tb::analytic_grid(kDesk);
  for (auto _ : state) benchmark::DoNotOptimize(tb::band_curve(grid, kDesk, costs));
}
BENCHMARK(BM_BandCurve)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const auto costs = tb::costs_for_ratio(0.1, kDesk);
  const auto policy = tb::Policy::constant_band(0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(tb::simulate(policy, kDesk, costs, 8, state.range(0), 1));
  }
  state.SetItemsProcessed(state.iterations() * 8 * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_BackwardInduction(benchmark::State& state) {
  const tb::OuParams params{0.05, 0.05};
  const auto grid = tb::build_grid(params, 8, 81, 6, 201);
  const auto costs = tb::costs_for_ratio(0.1, params);
  for (auto _ : state) benchmark::DoNotOptimize(tb::backward_induction(grid, costs, 5000));
}
BENCHMARK(BM_BackwardInduction)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
