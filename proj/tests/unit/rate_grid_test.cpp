#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "telegraph/bayes_filter.hpp"
#include "telegraph/ensemble.hpp"
#include "telegraph/error.hpp"
#include "telegraph/rate_grid_estimator.hpp"
#include "telegraph/telegraph_simulator.hpp"

namespace telegraph {
namespace {

const TransitionRates kMeasured{35, 50, 59, 0};

std::vector<TraceRecord> open_loop_trace(std::uint64_t seed, std::uint64_t bins = 5100) {
  SimConfig sim;
  sim.rates = kMeasured;
  sim.n_bins = bins;
  sim.rng_seed = seed;
  return run_trace(sim);
}

GridSpec zero_based() {
  GridSpec s;
  s.r21 = s.r10 = s.r_repump = AxisSpec{0, 150, 25};
  return s;
}

TEST(RateGrid, FlatInitialization) {
  const auto g = RateGrid::init_flat(GridSpec{}, BeliefVector::delta(HiddenState::two()));
  EXPECT_EQ(g.marginal_states(), BeliefVector::delta(HiddenState::two()));
  EXPECT_EQ(g.joint(0, 3, 4, 5), 0.0);
  EXPECT_EQ(g.joint(2, 3, 4, 5), g.joint(2, 0, 24, 11));
  EXPECT_NEAR(g.total(), 1.0, 1e-12);

  const BeliefVector mixed{{0.2, 0.3, 0.5}};
  const auto h = RateGrid::init_flat(GridSpec{}, mixed);
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(h.marginal_states()[a], mixed[a], 1e-13);
}

TEST(RateGrid, FlatMomentsAreUniformMoments) {
  const auto g = RateGrid::init_flat(zero_based(), BeliefVector{});
  for (const auto& r : g.marginal_rates()) {
    EXPECT_NEAR(r.mean, 75.0, 1e-10);
    // 25 equally spaced points, spacing 6.25: sd = h sqrt((n^2 - 1) / 12).
    EXPECT_NEAR(r.rms, 6.25 * std::sqrt(624.0 / 12.0), 1e-10);
  }
  EXPECT_FALSE(g.stopping_check(0.10));
  EXPECT_TRUE(g.stopping_check(0.61));
  EXPECT_FALSE(g.stopping_check(0.60));
  const auto d = RateGrid::init_flat(GridSpec{}, BeliefVector{});
  EXPECT_NEAR(d.marginal_rate(RateAxis::R10).mean, 76.0, 1e-10);
}

TEST(RateGrid, SingleCellStopsImmediately) {
  const auto g = RateGrid::init_flat(GridSpec::single_cell(kMeasured), BeliefVector{});
  const auto r = g.marginal_rates();
  EXPECT_EQ(r[0].mean, 35);
  EXPECT_EQ(r[1].rms, 0);
  EXPECT_TRUE(g.stopping_check());
  const auto zero = RateGrid::init_flat(GridSpec::single_cell({0, 50, 59, 0}), BeliefVector{});
  EXPECT_FALSE(zero.stopping_check());
}

TEST(RateGrid, SpecValidation) {
  GridSpec s;
  s.max_cells = 1000;
  try {
    RateGrid::init_flat(s, BeliefVector{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CapExceeded);
  }
  s = GridSpec{};
  s.r10 = {50, 10, 5};
  EXPECT_THROW(s.validate(), Error);
  s.r10 = {-1, 10, 5};
  EXPECT_THROW(s.validate(), Error);
  s.r10 = {1, 10, 0};
  EXPECT_THROW(s.validate(), Error);
}

TEST(RateGrid, ZeroStepUninformativeUpdateChangesNothing) {
  auto g = RateGrid::init_flat(GridSpec{}, BeliefVector{{0.2, 0.3, 0.5}});
  const auto before = g;
  PhotonCountModel flat;
  flat.mean_counts = {20, 20, 20};
  g.update(17, flat, 0.0);
  for (std::size_t i = 0; i < 25; i += 6)
    for (int a = 0; a < 3; ++a) {
      const double x = before.joint(a, i, i, i);
      // Renormalizing sums over every cell, so rounding grows with the cell count.
      EXPECT_NEAR(g.joint(a, i, i, i), x, 1e-11 * x);
    }
}

TEST(RateGrid, LinearizedModeEnforcesGuard) {
  auto g = RateGrid::init_flat(GridSpec{}, BeliefVector{});
  const PhotonCountModel m = PhotonCountModel{}.rescaled(3e-3);
  try {
    g.update(10, m, 3e-3, Propagation::Linearized);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GuardViolated);
  }
  EXPECT_NO_THROW(g.update(10, m, 3e-3, Propagation::Exact));
}

TEST(RateGrid, SingleCellReproducesFilter) {
  const auto recs = open_loop_trace(3, 10000);
  for (auto mode : {Propagation::Linearized, Propagation::Exact}) {
    FilterConfig fc;
    fc.rates = kMeasured;
    fc.propagation = mode;
    const auto beliefs = run_filter(recs, fc);
    auto g = RateGrid::init_flat(GridSpec::single_cell(kMeasured), fc.initial_belief);
    double worst = 0.0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      g.update(recs[i].photon_count, fc.photon_model, fc.bin_time, mode);
      const auto s = g.marginal_states();
      for (int a = 0; a < 3; ++a) worst = std::max(worst, std::abs(s[a] - beliefs[i][a]));
    }
    EXPECT_LT(worst, 1e-12);
  }
}

TEST(RateGrid, MarginalsStayNormalized) {
  const auto recs = open_loop_trace(4, 500);
  GridSpec s;
  s.r21.n_points = s.r10.n_points = s.r_repump.n_points = 9;
  auto g = RateGrid::init_flat(s, BeliefVector{});
  const PhotonCountModel m;
  for (const auto& r : recs) {
    g.update(r.photon_count, m, 1e-3);
    EXPECT_NEAR(g.total(), 1.0, 1e-10);
    EXPECT_NEAR(g.marginal_states().sum(), 1.0, 1e-12);
    for (int a = 0; a < 3; ++a) {
      const auto d = g.marginal_distribution(RateAxis(a));
      double sum = 0.0;
      for (double x : d) {
        EXPECT_GE(x, 0.0);
        sum += x;
      }
      EXPECT_NEAR(sum, 1.0, 1e-10);
    }
  }
}

TEST(RateGrid, PosteriorContracts) {
  GridSpec s;
  s.r21.n_points = s.r10.n_points = s.r_repump.n_points = 17;
  const auto widths = run_ensemble(20, 31, [&](std::size_t, std::uint64_t seed) {
    const auto recs = open_loop_trace(seed, 5000);
    auto g = RateGrid::init_flat(s, BeliefVector{});
    std::array<std::array<double, 3>, 2> out{};
    for (std::size_t i = 0; i < recs.size(); ++i) {
      g.update(recs[i].photon_count, PhotonCountModel{}, 1e-3);
      if (i + 1 == 1000 || i + 1 == 5000) {
        const auto r = g.marginal_rates();
        for (int a = 0; a < 3; ++a) out[i + 1 == 1000 ? 0 : 1][a] = r[a].rms;
      }
    }
    return out;
  });
  for (int a = 0; a < 3; ++a) {
    std::vector<double> early, late;
    for (const auto& w : widths) {
      early.push_back(w[0][a]);
      late.push_back(w[1][a]);
    }
    std::nth_element(early.begin(), early.begin() + 10, early.end());
    std::nth_element(late.begin(), late.begin() + 10, late.end());
    EXPECT_LT(late[10], early[10]) << a;
  }
}

TEST(RateGrid, CalibratedOverRepeatedRuns) {
  const double truth[3] = {35, 50, 59};
  const auto estimates = run_ensemble(100, 2718, [](std::size_t, std::uint64_t seed) {
    return estimate_rates(open_loop_trace(seed), GridSpec{}, PhotonCountModel{}, 1e-3).final_rates;
  });
  for (int a = 0; a < 3; ++a) {
    int covered = 0;
    for (const auto& e : estimates) covered += std::abs(e[a].mean - truth[a]) <= 2 * e[a].rms;
    EXPECT_GE(covered, 90) << a;
  }
}

TEST(EstimateRates, EmptyTraceDoesNotConverge) {
  const auto est = estimate_rates({}, GridSpec{}, PhotonCountModel{}, 1e-3);
  EXPECT_FALSE(est.converged);
  EXPECT_EQ(est.bins_used, 0u);
  EXPECT_NEAR(est.final_rates[0].mean, 76.0, 1e-10);
}

TEST(EstimateRates, SingleCellConvergesAtStart) {
  const auto recs = open_loop_trace(5, 100);
  EstimationOptions opt;
  opt.stop_at_convergence = true;
  const auto est = estimate_rates(recs, GridSpec::single_cell(kMeasured), PhotonCountModel{},
                                  1e-3, opt);
  EXPECT_TRUE(est.converged);
  EXPECT_EQ(est.stop_time, 0.0);
  EXPECT_EQ(est.bins_used, 0u);
}

TEST(EstimateRates, SnapshotsAndStopTime) {
  const auto recs = open_loop_trace(6, 1000);
  GridSpec s;
  s.r21.n_points = s.r10.n_points = s.r_repump.n_points = 7;
  EstimationOptions opt;
  opt.snapshot_every = 250;
  opt.stop_threshold = 0.5;
  const auto est = estimate_rates(recs, s, PhotonCountModel{}, 1e-3, opt);
  ASSERT_EQ(est.snapshots.size(), 5u);
  EXPECT_EQ(est.snapshots[0].time, 0.0);
  EXPECT_DOUBLE_EQ(est.snapshots[4].time, 1.0);
  for (const auto& snap : est.snapshots) EXPECT_EQ(snap.marginals[1].size(), 7u);
  ASSERT_TRUE(est.converged);
  EXPECT_EQ(std::llround(*est.stop_time / 1e-3) % 10, 0);
  EXPECT_EQ(est.bins_used, 1000u);
}

}  // namespace
}  // namespace telegraph
