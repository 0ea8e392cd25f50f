#pragma once

// Simulator, streaming filter and policy wired into one feedback loop.

#include <cstdint>
#include <span>
#include <vector>

#include "telegraph/bayes_filter.hpp"
#include "telegraph/feedback_controller.hpp"
#include "telegraph/telegraph_simulator.hpp"

namespace telegraph {

struct ClosedLoopRun {
  std::vector<TraceRecord> records;
  std::vector<BeliefVector> posteriors;  // per bin, before that bin's pulse
  std::vector<ControlAction> actions;    // per bin
  std::vector<JumpEvent> jumps;          // hidden-state changes
};

/// One feedback run. The filter uses filter_config except for pulse
/// strengths, which come from each decision.
ClosedLoopRun run_closed_loop(const SimConfig& sim, const FilterConfig& filter_config,
                              const ControlPolicy& policy);

/// Filter config matching a simulator config (same rates, model, bin time).
FilterConfig matched_filter_config(const SimConfig& sim);

struct TuningResult {
  double t = 0.0;
  double mean_p1 = 0.0;
  std::vector<double> candidates;
  std::vector<double> scores;  // mean target posterior per candidate
};

/// Coarse sweep of a common fixed pulse probability for the threshold
/// policy; picks the candidate with the highest mean target posterior over
/// `n_traces` runs derived from `seed`.
TuningResult tune_fixed_pulse(const SimConfig& sim, const FilterConfig& filter_config,
                              const ControlPolicy& policy, std::size_t n_traces,
                              std::uint64_t seed,
                              std::span<const double> candidates = {});

}  // namespace telegraph
