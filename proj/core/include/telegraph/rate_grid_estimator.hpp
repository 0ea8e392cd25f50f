#pragma once

// Joint Bayesian inference over the hidden state and the three transition
// rates (R21, R10, Rr) on a static grid. Each rate cell carries its own
// state slice, propagated with that cell's rate equations, and all cells
// share the count likelihood of the state. Rate information enters only
// through the propagation coupling.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "telegraph/bayes_filter.hpp"
#include "telegraph/matrix3.hpp"
#include "telegraph/state_model.hpp"

namespace telegraph {

struct AxisSpec {
  double min = 2.0;
  double max = 150.0;
  std::size_t n_points = 25;

  /// Grid value at index i. A single-point axis sits at `min`.
  double value(std::size_t i) const;
  void validate(const char* name) const;

  friend bool operator==(const AxisSpec&, const AxisSpec&) = default;
};

enum class RateAxis { R21 = 0, R10 = 1, Repump = 2 };

struct GridSpec {
  AxisSpec r21;
  AxisSpec r10;
  AxisSpec r_repump;
  std::size_t max_cells = 20'000'000;  // cap on 3 * n21 * n10 * nr

  const AxisSpec& axis(RateAxis a) const;
  std::size_t rate_cells() const { return r21.n_points * r10.n_points * r_repump.n_points; }
  std::size_t total_cells() const { return 3 * rate_cells(); }

  /// Throws InvalidArgument on a malformed axis and CapExceeded over the cap.
  void validate() const;

  /// Grid with one point per axis, at the given rates.
  static GridSpec single_cell(const TransitionRates& rates);

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct RatePosterior {
  double mean = 0.0;
  double rms = 0.0;  // standard deviation of the marginal
};

class RateGrid {
 public:
  /// Flat prior over rate cells, state slice proportional to initial_states.
  static RateGrid init_flat(const GridSpec& spec, const BeliefVector& initial_states);

  /// Propagates every cell's state slice over dt with that cell's rates,
  /// multiplies by p(n | alpha) and renormalizes the whole grid.
  /// Throws GuardViolated when a cell's rates are too fast for a linearized
  /// step and AllZero when every cell underflows.
  void update(std::int64_t n, const PhotonCountModel& model, double dt,
              Propagation mode = Propagation::Exact);

  BeliefVector marginal_states() const;

  /// 1-D marginal over one rate axis.
  std::vector<double> marginal_distribution(RateAxis axis) const;

  RatePosterior marginal_rate(RateAxis axis) const;

  /// R21, R10, Rr.
  std::array<RatePosterior, 3> marginal_rates() const;

  /// rms / mean <= threshold for all three rates.
  /// Throws ZeroMean for a zero-mean marginal with positive spread.
  bool stopping_check(double threshold = 0.10) const;

  const GridSpec& spec() const noexcept { return spec_; }

  /// Joint probability of (alpha, i21, i10, ir).
  double joint(int alpha, std::size_t i21, std::size_t i10, std::size_t ir) const;

  /// Sum of all entries; 1 up to rounding.
  double total() const;

 private:
  explicit RateGrid(const GridSpec& spec);
  std::size_t cell(std::size_t i21, std::size_t i10, std::size_t ir) const;
  void prepare_propagators(double dt, Propagation mode);

  GridSpec spec_;
  std::array<std::vector<double>, 3> prob_;  // [alpha][cell]
  // Per-cell propagator, rebuilt when dt or the mode changes.
  std::vector<Matrix3> propagators_;
  double prop_dt_ = -1.0;
  Propagation prop_mode_ = Propagation::Exact;
};

/// Snapshot of the three rate marginals at a given time, for posterior
/// evolution plots.
struct GridSnapshot {
  double time = 0.0;
  std::array<std::vector<double>, 3> marginals;
};

struct RateEstimate {
  std::array<RatePosterior, 3> rates;       // at the stopping point or end of data
  std::array<RatePosterior, 3> final_rates; // after all data
  bool converged = false;
  std::optional<double> stop_time;          // seconds of data used at convergence
  std::size_t bins_used = 0;
  BeliefVector final_states;
  std::vector<GridSnapshot> snapshots;
};

struct EstimationOptions {
  double stop_threshold = 0.10;
  std::size_t check_every = 10;   // bins between stopping checks
  std::size_t snapshot_every = 0; // 0 disables snapshots
  bool stop_at_convergence = false;
  Propagation propagation = Propagation::Exact;
  BeliefVector initial_states = BeliefVector::delta(HiddenState::two());
};

/// Runs the grid over a count sequence, checking the stopping rule as it
/// goes. Pulses in the records are ignored (open-loop data is assumed).
RateEstimate estimate_rates(std::span<const TraceRecord> records, const GridSpec& spec,
                            const PhotonCountModel& model, double dt,
                            const EstimationOptions& options = {});

}  // namespace telegraph
