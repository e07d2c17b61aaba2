#include <benchmark/benchmark.h>

#include "mmfe/energy_example.hpp"
#include "mmfe/lqg.hpp"
#include "mmfe/parallel.hpp"
#include "mmfe/sim_harness.hpp"
#include "mmfe/sweep.hpp"
#include "mmfe/tabular_dp.hpp"

using namespace mmfe;

namespace {

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void BM_SweepGrid(benchmark::State& state) {
  const energy::EnergyParams p;
  const energy::SweepAxis a1{"gamma", energy::linspace(0.5, 0.99, 25)};
  const energy::SweepAxis a2{"g", energy::linspace(0.1, 0.95, 25)};
  for (auto _ : state) benchmark::DoNotOptimize(energy::sweep_grid(p, a1, a2, exec_of(state)));
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

void BM_SimulateDiscountedCost(benchmark::State& state) {
  const energy::EnergyParams params;
  const auto nf = energy::build_no_forecast(params);
  const auto sol = lqg::riccati_solve(nf.lqr);
  const auto init =
      sim::InitialDistribution::from_second_moment(nf.initial_second_moment, 2, params.tau - params.tau0());
  sim::SimConfig cfg;
  cfg.replications = 5000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim::simulate_discounted_cost(nf.lqr, init, sol.gain, cfg, exec_of(state)));
  }
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

void BM_BackwardInduction(benchmark::State& state) {
  const dp::TabularMdp mdp = dp::random_mdp(400, 6, 8, 11);
  for (auto _ : state) benchmark::DoNotOptimize(dp::backward_induction(mdp, exec_of(state)));
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

}  // namespace

BENCHMARK(BM_SweepGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SimulateDiscountedCost)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BackwardInduction)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
