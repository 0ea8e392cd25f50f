#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "telegraph/analytics.hpp"
#include "telegraph/closed_loop.hpp"
#include "telegraph/ensemble.hpp"
#include "telegraph/error.hpp"

namespace telegraph {
namespace {

SimConfig feedback_sim(std::uint64_t seed) {
  SimConfig sim;
  sim.rates = {35, 50, 0, 0};
  sim.n_bins = 300;
  sim.rng_seed = seed;
  return sim;
}

double mean_component(const std::vector<std::vector<BeliefVector>>& traces, int alpha) {
  return mean_occupancy(traces).mean_p[alpha];
}

std::vector<std::vector<BeliefVector>> ensemble(std::size_t n, std::uint64_t seed,
                                                const ControlPolicy& policy,
                                                const SimConfig& base = feedback_sim(0)) {
  return run_ensemble(n, seed, [&](std::size_t, std::uint64_t s) {
    SimConfig sim = base;
    sim.rng_seed = s;
    return run_closed_loop(sim, matched_filter_config(sim), policy).posteriors;
  });
}

TEST(ClosedLoop, RecordsOneDecisionPerBin) {
  ControlPolicy pol;
  const auto sim = feedback_sim(1);
  const auto run = run_closed_loop(sim, matched_filter_config(sim), pol);
  ASSERT_EQ(run.records.size(), 300u);
  ASSERT_EQ(run.posteriors.size(), 300u);
  ASSERT_EQ(run.actions.size(), 300u);
  std::size_t pulses = 0;
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    EXPECT_EQ(run.records[i].pulse, run.actions[i].pulse);
    pulses += run.actions[i].pulse != Pulse::None;
  }
  EXPECT_GT(pulses, 0u);
  // The recorded belief is the posterior before the bin's own pulse.
  EXPECT_EQ(run.actions[0].pulse, Pulse::Depump);
  EXPECT_EQ(run.posteriors[0].argmax(), 2);
}

TEST(ClosedLoop, Deterministic) {
  ControlPolicy pol;
  const auto sim = feedback_sim(2);
  const auto a = run_closed_loop(sim, matched_filter_config(sim), pol);
  const auto b = run_closed_loop(sim, matched_filter_config(sim), pol);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.posteriors, b.posteriors);
}

TEST(ClosedLoop, InertControllerIsOpenLoop) {
  ControlPolicy pol;
  pol.fixed_t_repump = pol.fixed_t_depump = 0.0;
  const auto traces = ensemble(50, 3, pol);
  EXPECT_LT(mean_component(traces, 1), 0.2);
  const auto sim = feedback_sim(4);
  const auto run = run_closed_loop(sim, matched_filter_config(sim), pol);
  for (const auto& j : run.jumps) EXPECT_EQ(j.cause, JumpCause::Spontaneous);
}

TEST(ClosedLoop, SaturatingPumpHoldsTopState) {
  ControlPolicy pol;
  pol.mode = PolicyMode::OptimalT;
  pol.target = BeliefVector::delta(HiddenState::two());
  const auto traces = ensemble(50, 5, pol);
  EXPECT_GT(mean_component(traces, 2), 0.9);
}

TEST(ClosedLoop, FeedbackBeatsPassiveCeilingForEverySeed) {
  std::vector<double> rs;
  for (int i = 0; i <= 150; ++i) rs.push_back(i);
  const double ceiling = sweep_repump_rate({35, 50, 0, 0}, rs, 0.3, 1e-3).best_finite.mean_p1;
  ControlPolicy pol;
  pol.fixed_t_repump = pol.fixed_t_depump = 0.4;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    EXPECT_GT(mean_component(ensemble(20, seed, pol), 1), ceiling) << seed;
  }
}

TEST(ClosedLoop, SimpleTunedPolicyIsCloseToOptimal) {
  const auto sim = feedback_sim(0);
  ControlPolicy simple;
  const auto tuned = tune_fixed_pulse(sim, matched_filter_config(sim), simple, 20, 6);
  EXPECT_EQ(tuned.scores.size(), 9u);
  simple.fixed_t_repump = simple.fixed_t_depump = tuned.t;
  ControlPolicy optimal;
  optimal.mode = PolicyMode::OptimalT;
  const double p_simple = mean_component(ensemble(100, 7, simple), 1);
  const double p_optimal = mean_component(ensemble(100, 7, optimal), 1);
  EXPECT_NEAR(p_simple, p_optimal, 0.02);
}

TEST(ClosedLoop, OpenLoopFirstDominanceTracksDecay) {
  // Pure decay from (0, 0, 1): the hidden chain reaches alpha = 1 after an
  // Exp(R21) wait. The filter may call it a little early (its prior drifts
  // toward alpha = 1) or late, but typically within a few bins.
  SimConfig sim = feedback_sim(0);
  sim.n_bins = 1000;
  std::vector<double> lags;
  double hidden_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 400; ++seed) {
    sim.rng_seed = seed;
    std::vector<JumpEvent> jumps;
    const auto recs = run_trace(sim, {}, &jumps);
    if (jumps.empty() || jumps.front().to != HiddenState::one()) continue;
    const auto beliefs = run_filter(recs, matched_filter_config(sim));
    const auto first = std::find_if(beliefs.begin(), beliefs.end(),
                                    [](const BeliefVector& b) { return b.argmax() == 1; });
    if (first == beliefs.end()) continue;  // decayed through alpha = 1 unseen
    const double seen = static_cast<double>(first - beliefs.begin() + 1) * sim.bin_time;
    lags.push_back(std::abs(seen - jumps.front().time));
    hidden_sum += jumps.front().time;
  }
  ASSERT_GT(lags.size(), 300u);
  EXPECT_NEAR(hidden_sum / lags.size(), 1.0 / 35.0, 0.004);
  std::nth_element(lags.begin(), lags.begin() + lags.size() / 2, lags.end());
  EXPECT_LE(lags[lags.size() / 2], 3e-3);
}

TEST(Tuning, PicksBestCandidate) {
  const auto sim = feedback_sim(0);
  const std::vector<double> candidates = {0.0, 0.4};
  const auto r = tune_fixed_pulse(sim, matched_filter_config(sim), ControlPolicy{}, 10, 8, candidates);
  EXPECT_EQ(r.t, 0.4);
  ASSERT_EQ(r.scores.size(), 2u);
  EXPECT_GT(r.scores[1], r.scores[0]);
  EXPECT_EQ(r.mean_p1, r.scores[1]);
}

}  // namespace
}  // namespace telegraph
