#pragma once

// Figure-level quantities: rate-equation trajectories and the passive
// repump-rate sweep, ensemble occupancies, dwell times in the target state
// and recovery times after leaving it.

#include <optional>
#include <span>
#include <vector>

#include "telegraph/bayes_filter.hpp"
#include "telegraph/state_model.hpp"
#include "telegraph/telegraph_simulator.hpp"

namespace telegraph {

/// Trajectory of the rate equations sampled every dt, starting with p0.
/// Holds round(duration / dt) + 1 points.
std::vector<BeliefVector> integrate_rate_equations(const BeliefVector& p0,
                                                   const TransitionRates& rates, double duration,
                                                   double dt,
                                                   Propagation mode = Propagation::Linearized);

/// Mean over the points after the initial one (one value per bin).
BeliefVector bin_average(std::span<const BeliefVector> trajectory);

/// Stationary distribution of the rate generator (depump excluded):
/// p proportional to (R10 R21, 2 Rr R21, 2 Rr^2).
BeliefVector stationary_distribution(const TransitionRates& rates);

/// Repump rate maximizing the stationary p1, sqrt(R10 R21 / 2).
double optimal_stationary_repump(const TransitionRates& rates);

struct SweepPoint {
  double r_repump = 0.0;
  double mean_p1 = 0.0;        // finite trace from (0, 0, 1)
  double stationary_p1 = 0.0;  // t -> infinity
};

struct SweepCurve {
  std::vector<SweepPoint> points;
  SweepPoint best_finite;      // maximizer of the finite-trace curve
  double best_stationary_r = 0.0;
  double best_stationary_p1 = 0.0;
};

/// Mean p1 over a finite trace from (0, 0, 1) for each repump rate.
SweepCurve sweep_repump_rate(const TransitionRates& base, std::span<const double> r_values,
                             double duration, double dt);

struct OccupancySummary {
  BeliefVector mean_p;
  std::size_t n_bins = 0;
  std::size_t n_traces = 0;
};

/// Time-and-ensemble average of per-bin beliefs. Throws Empty.
OccupancySummary mean_occupancy(std::span<const std::vector<BeliefVector>> traces);

struct DwellStats {
  double tau = 0.0;     // seconds
  double standard_error = 0.0;
  std::size_t n_episodes = 0;
  std::size_t n_truncated = 0;  // runs touching a trace boundary, excluded
};

/// Mean length of maximal runs with argmax(belief) == target. Runs that
/// touch either end of a trace are excluded and counted in n_truncated.
/// Throws NoEpisodes when the target never dominates.
DwellStats dwell_time(std::span<const std::vector<BeliefVector>> traces, HiddenState target,
                      double bin_time);

struct RecoveryStats {
  double mean = 0.0;  // seconds
  std::size_t n_episodes = 0;
  std::size_t n_censored = 0;  // departures still open at the end of a trace
};

/// Time until argmax(belief) returns to the target. An episode starts at the
/// first bin without target dominance and lasts until the next dominant bin,
/// so a single missed bin costs one bin time. The trace start opens an
/// episode at bin -1, so dominance at bin 0 also takes one bin.
/// Throws NeverReached if some trace never reaches the target.
RecoveryStats time_to_target(std::span<const std::vector<BeliefVector>> traces, double bin_time,
                             HiddenState target = HiddenState::one());

/// Completed sojourn times of the hidden state in `target`, from a jump log
/// covering [0, duration]. Sojourns cut by either end are dropped.
std::vector<double> hidden_dwell_times(std::span<const JumpEvent> jumps, HiddenState initial,
                                       HiddenState target, double duration);

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// One-sample Kolmogorov-Smirnov test against an exponential with the
/// given mean (asymptotic p-value with the Stephens correction).
KsResult ks_test_exponential(std::span<const double> samples, double mean);

}  // namespace telegraph
