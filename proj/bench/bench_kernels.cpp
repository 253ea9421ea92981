// Serial reference vs OpenMP kernels on the three hot loops.

#include <benchmark/benchmark.h>

#include "compshop/equilibrium.hpp"
#include "compshop/numerics.hpp"
#include "compshop/oracle.hpp"
#include "compshop/parallel.hpp"

using namespace compshop;

namespace {

Exec exec_of(const benchmark::State& state) {
  return state.range(0) ? Exec::Parallel : Exec::Serial;
}

const EquilibriumSolution& expensive() {
  static const EquilibriumSolution s = solve_equilibrium(entropy_kernel(), 1.0, 0.25);
  return s;
}

void BM_OracleSolve(benchmark::State& state) {
  const Prior prior(0.25);
  const auto grid = PosteriorGrid::build(24, prior);
  const auto& s = expensive();
  const CostModel cost(entropy_kernel(), 1.0);
  const ValueFunction vf(s.pricing, cost);
  for (auto _ : state) benchmark::DoNotOptimize(oracle_solve(grid, prior, vf, cost, exec_of(state)));
}

void BM_SimulateMarket(benchmark::State& state) {
  const auto& s = expensive();
  for (auto _ : state) benchmark::DoNotOptimize(simulate_market(s, 1000000, 7, exec_of(state)));
}

void BM_LineScan(benchmark::State& state) {
  const auto& s = expensive();
  const ValueFunction vf(s.pricing, CostModel(entropy_kernel(), 1.0));
  const auto xs = numerics::linspace(1e-6, 0.5, 20000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        tabulate(xs, [&](double x) { return directional_derivative_D(vf, x); }, exec_of(state)));
  }
}

}  // namespace

BENCHMARK(BM_OracleSolve)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateMarket)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LineScan)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
