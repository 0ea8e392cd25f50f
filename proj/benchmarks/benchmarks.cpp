#include <benchmark/benchmark.h>

#include "telegraph/bayes_filter.hpp"
#include "telegraph/closed_loop.hpp"
#include "telegraph/feedback_controller.hpp"
#include "telegraph/rate_grid_estimator.hpp"
#include "telegraph/telegraph_simulator.hpp"

namespace {

using namespace telegraph;

const TransitionRates kMeasured{35.0, 50.0, 59.0, 0.0};

std::vector<TraceRecord> open_loop(std::uint64_t n_bins) {
  SimConfig sim;
  sim.rates = kMeasured;
  sim.n_bins = n_bins;
  return run_trace(sim);
}

void BM_FilterStep(benchmark::State& state) {
  const auto recs = open_loop(4096);
  FilterConfig fc;
  fc.rates = kMeasured;
  fc.propagation = state.range(0) ? Propagation::Exact : Propagation::Linearized;
  BayesFilter f(fc);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(f.observe(recs[i++ & 4095].photon_count));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FilterStep)->Arg(0)->Arg(1);

void BM_GridUpdate(benchmark::State& state) {
  GridSpec spec;
  const auto n = static_cast<std::size_t>(state.range(0));
  spec.r21.n_points = spec.r10.n_points = spec.r_repump.n_points = n;
  auto grid = RateGrid::init_flat(spec, BeliefVector::delta(HiddenState::two()));
  const auto recs = open_loop(1024);
  const PhotonCountModel model;
  std::size_t i = 0;
  for (auto _ : state) {
    grid.update(recs[i++ & 1023].photon_count, model, 1e-3);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_GridUpdate)->Arg(10)->Arg(25);

void BM_SimulateTrace(benchmark::State& state) {
  SimConfig sim;
  sim.rates = kMeasured;
  sim.n_bins = 5100;
  for (auto _ : state) {
    ++sim.rng_seed;
    benchmark::DoNotOptimize(run_trace(sim));
  }
  state.SetItemsProcessed(state.iterations() * 5100);
}
BENCHMARK(BM_SimulateTrace);

void BM_ClosedLoop(benchmark::State& state) {
  SimConfig sim;
  sim.rates = {35.0, 50.0, 0.0, 0.0};
  sim.n_bins = 300;
  ControlPolicy policy;
  policy.mode = state.range(0) ? PolicyMode::OptimalT : PolicyMode::SimpleThreshold;
  policy.fixed_t_repump = policy.fixed_t_depump = 0.4;
  const auto fc = matched_filter_config(sim);
  for (auto _ : state) {
    ++sim.rng_seed;
    benchmark::DoNotOptimize(run_closed_loop(sim, fc, policy));
  }
  state.SetItemsProcessed(state.iterations() * 300);
}
BENCHMARK(BM_ClosedLoop)->Arg(0)->Arg(1);

void BM_OptimalPulse(benchmark::State& state) {
  const BeliefVector b{{0.6, 0.3, 0.1}};
  const BeliefVector target{{0.0, 1.0, 0.0}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimal_pulse_probability(b, target, Pulse::Repump));
  }
}
BENCHMARK(BM_OptimalPulse);

}  // namespace

BENCHMARK_MAIN();
