#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "telegraph/analytics.hpp"
#include "telegraph/error.hpp"
#include "telegraph/telegraph_simulator.hpp"

namespace telegraph {
namespace {

// Full simulator generator, depump included: 0->1 2Rr, 1->2 Rr,
// 2->1 R21 + 2Rd, 1->0 R10 + Rd. Columns are the source state.
Eigen::Matrix3d chain_generator(const TransitionRates& r) {
  const double up0 = 2 * r.r_repump, up1 = r.r_repump;
  const double down1 = r.r10 + r.r_depump, down2 = r.r21 + 2 * r.r_depump;
  Eigen::Matrix3d g;
  g << -up0, down1, 0,
       up0, -up1 - down1, down2,
       0, up1, -down2;
  return g;
}

TEST(ExitRates, DepumpMirrorsRepump) {
  const TransitionRates r{35, 50, 59, 7};
  EXPECT_DOUBLE_EQ(exit_rates(HiddenState::zero(), r).up, 118);
  EXPECT_DOUBLE_EQ(exit_rates(HiddenState::zero(), r).down, 0);
  EXPECT_DOUBLE_EQ(exit_rates(HiddenState::one(), r).up, 59);
  EXPECT_DOUBLE_EQ(exit_rates(HiddenState::one(), r).down, 57);
  EXPECT_DOUBLE_EQ(exit_rates(HiddenState::two(), r).down, 49);
  EXPECT_DOUBLE_EQ(exit_rates(HiddenState::two(), r).up, 0);
}

TEST(StepContinuous, FrozenChainNeverMoves) {
  RandomStream rng(1);
  for (int a = 0; a < 3; ++a) {
    std::vector<JumpEvent> jumps;
    EXPECT_EQ(step_continuous(HiddenState(a), {}, 10.0, rng, &jumps), HiddenState(a));
    EXPECT_TRUE(jumps.empty());
  }
}

class BinTransitions : public ::testing::TestWithParam<TransitionRates> {};

TEST_P(BinTransitions, MatchMatrixExponential) {
  const TransitionRates rates = GetParam();
  const double dt = 1e-3;
  const Eigen::Matrix3d exact = (dt * chain_generator(rates)).exp();
  RandomStream rng(derive_seed(77, static_cast<std::uint64_t>(rates.r21 + 1000 * rates.r_depump)));
  const int n = 100000;
  for (int from = 0; from < 3; ++from) {
    std::array<int, 3> counts{};
    for (int i = 0; i < n; ++i) ++counts[step_continuous(HiddenState(from), rates, dt, rng).value()];
    for (int to = 0; to < 3; ++to) {
      const double p = exact(to, from);
      const double sigma = std::sqrt(std::max(p * (1 - p), 1e-12) / n);
      EXPECT_NEAR(counts[to] / double(n), p, 4 * sigma + 1e-12) << from << "->" << to;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(RateSets, BinTransitions,
                         ::testing::Values(TransitionRates{35, 50, 59, 0},
                                           TransitionRates{150, 150, 150, 0},
                                           TransitionRates{35, 50, 0, 0},
                                           TransitionRates{10, 20, 5, 40},
                                           TransitionRates{400, 300, 250, 100}));

TEST(StepContinuous, FirstOrderDecayProbability) {
  RandomStream rng(3);
  const int n = 1000000;
  int jumped = 0;
  for (int i = 0; i < n; ++i) {
    jumped += step_continuous(HiddenState::two(), {35, 50, 59, 0}, 1e-3, rng) != HiddenState::two();
  }
  EXPECT_NEAR(jumped / double(n), 0.035, 0.002);
}

TEST(StepContinuous, LongRunOccupancyIsStationary) {
  const TransitionRates r{35, 50, 59, 0};
  RandomStream rng(4);
  HiddenState s = HiddenState::two();
  std::array<double, 3> occ{};
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    s = step_continuous(s, r, 1e-3, rng);
    occ[s.value()] += 1.0 / n;
  }
  const Eigen::Matrix3d g = chain_generator(r);
  Eigen::FullPivLU<Eigen::Matrix3d> lu(g);
  Eigen::Vector3d v = lu.kernel().col(0);
  v /= v.sum();
  EXPECT_NEAR(v(1), 0.322, 1e-3);
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(occ[a], v(a), 0.01);
}

TEST(StepContinuous, PureDecayNeverRaisesAlpha) {
  SimConfig sim;
  sim.rates = {35, 50, 0, 0};
  sim.n_bins = 3000;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    sim.rng_seed = seed;
    const auto recs = run_trace(sim);
    for (std::size_t i = 1; i < recs.size(); ++i) {
      EXPECT_LE(recs[i].true_state->value(), recs[i - 1].true_state->value());
    }
  }
}

TEST(EmitPhotons, ZeroMeanGivesZero) {
  PhotonCountModel m;
  m.mean_counts = {40, 28, 0};
  RandomStream rng(5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(emit_photons(HiddenState::two(), m, rng), 0);
}

TEST(EmitPhotons, Moments) {
  for (auto family : {CountFamily::Poisson, CountFamily::OverDispersed}) {
    PhotonCountModel m;
    m.family = family;
    m.fano = family == CountFamily::Poisson ? 1.0 : 2.0;
    RandomStream rng(6);
    const int n = 100000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
      const double x = static_cast<double>(emit_photons(HiddenState::one(), m, rng));
      s += x;
      s2 += x * x;
    }
    const double mean = s / n, var = (s2 - n * mean * mean) / (n - 1);
    const double true_var = 28 * m.fano;
    EXPECT_NEAR(mean, 28, 3 * std::sqrt(true_var / n));
    EXPECT_NEAR(var / mean, m.fano, 3 * std::sqrt(3.0 / n) * true_var / 28);
  }
}

TEST(ApplyPulse, Limits) {
  RandomStream rng(7);
  for (int a = 0; a < 3; ++a) {
    EXPECT_EQ(apply_pulse(HiddenState(a), {Pulse::Repump, 0.0}, rng), HiddenState(a));
    EXPECT_EQ(apply_pulse(HiddenState(a), {Pulse::Depump, 0.0}, rng), HiddenState(a));
    EXPECT_EQ(apply_pulse(HiddenState(a), {Pulse::Repump, 1.0}, rng), HiddenState::two());
    EXPECT_EQ(apply_pulse(HiddenState(a), {Pulse::Depump, 1.0}, rng), HiddenState::zero());
  }
}

TEST(ApplyPulse, BinomialOutcomeFromGroundState) {
  RandomStream rng(8);
  const int n = 1000000;
  std::array<int, 3> counts{};
  for (int i = 0; i < n; ++i) ++counts[apply_pulse(HiddenState::zero(), {Pulse::Repump, 0.5}, rng).value()];
  const double expected[3] = {0.25, 0.5, 0.25};
  for (int a = 0; a < 3; ++a) {
    const double sigma = std::sqrt(expected[a] * (1 - expected[a]) / n);
    EXPECT_NEAR(counts[a] / double(n), expected[a], 3 * sigma);
  }
  std::array<int, 3> mirror{};
  for (int i = 0; i < n; ++i) ++mirror[apply_pulse(HiddenState::two(), {Pulse::Depump, 0.3}, rng).value()];
  const double m[3] = {0.09, 0.42, 0.49};
  for (int a = 0; a < 3; ++a) {
    EXPECT_NEAR(mirror[a] / double(n), m[a], 4 * std::sqrt(m[a] * (1 - m[a]) / n));
  }
}

TEST(ApplyPulse, DirectionIsMonotone) {
  RandomStream rng(9);
  for (int i = 0; i < 10000; ++i) {
    const HiddenState s(i % 3);
    EXPECT_GE(apply_pulse(s, {Pulse::Repump, 0.6}, rng).value(), s.value());
    EXPECT_LE(apply_pulse(s, {Pulse::Depump, 0.6}, rng).value(), s.value());
  }
}

TEST(RunTrace, SingleFrozenBin) {
  SimConfig sim;
  sim.n_bins = 1;
  sim.photon_model.mean_counts = {2, 1, 0};
  const auto recs = run_trace(sim);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0], (TraceRecord{0, 0, Pulse::None, HiddenState::two()}));
}

TEST(RunTrace, DeterministicPerSeed) {
  SimConfig sim;
  sim.rates = {35, 50, 59, 0};
  sim.n_bins = 5000;
  sim.rng_seed = 42;
  std::vector<JumpEvent> ja, jb;
  EXPECT_EQ(run_trace(sim, {}, &ja), run_trace(sim, {}, &jb));
  ASSERT_EQ(ja.size(), jb.size());
  for (std::size_t i = 0; i < ja.size(); ++i) EXPECT_EQ(ja[i].time, jb[i].time);
  sim.rng_seed = 43;
  EXPECT_NE(run_trace(sim), run_trace(SimConfig{sim.rates, sim.photon_model, 1e-3, 5000,
                                                HiddenState::two(), 42}));
}

TEST(RunTrace, ControllerPulsesAreRecordedAndApplied) {
  SimConfig sim;
  sim.rates = {0, 0, 0, 0};
  sim.n_bins = 4;
  sim.initial_state = HiddenState::zero();
  std::vector<JumpEvent> jumps;
  const auto recs = run_trace(
      sim,
      [](const TraceRecord& r) -> std::optional<PulseSpec> {
        if (r.bin_index == 1) return PulseSpec{Pulse::Repump, 1.0};
        return std::nullopt;
      },
      &jumps);
  EXPECT_EQ(recs[0].true_state, HiddenState::zero());
  EXPECT_EQ(recs[1].pulse, Pulse::Repump);
  EXPECT_EQ(recs[1].true_state, HiddenState::zero());  // count precedes the pulse
  EXPECT_EQ(recs[2].true_state, HiddenState::two());
  ASSERT_EQ(jumps.size(), 1u);
  EXPECT_EQ(jumps[0].cause, JumpCause::Pulse);
  EXPECT_DOUBLE_EQ(jumps[0].time, 2e-3);
}

TEST(RunTrace, JumpLogReproducesStates) {
  SimConfig sim;
  sim.rates = {35, 50, 59, 0};
  sim.n_bins = 3000;
  sim.rng_seed = 10;
  std::vector<JumpEvent> jumps;
  const auto recs = run_trace(sim, {}, &jumps);
  RandomStream rng(1);
  const auto replay = observe_trajectory(jumps, sim.initial_state, sim.photon_model, sim.bin_time,
                                         sim.n_bins, rng);
  ASSERT_EQ(replay.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_EQ(replay[i].true_state, recs[i].true_state);
  for (std::size_t i = 1; i < jumps.size(); ++i) {
    EXPECT_GE(jumps[i].time, jumps[i - 1].time);
    EXPECT_EQ(jumps[i].from, jumps[i - 1].to);
  }
}

TEST(SimConfig, Validation) {
  SimConfig sim;
  EXPECT_NO_THROW(sim.validate());
  sim.n_bins = 0;
  EXPECT_THROW(sim.validate(), Error);
  sim = SimConfig{};
  sim.bin_time = 2e-3;
  EXPECT_THROW(sim.validate(), Error);
  sim.photon_model = sim.photon_model.rescaled(2e-3);
  EXPECT_NO_THROW(sim.validate());
  sim.bin_time = 0;
  EXPECT_THROW(sim.validate(), Error);
}

}  // namespace
}  // namespace telegraph
