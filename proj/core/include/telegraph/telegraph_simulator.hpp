#pragma once

// Ground-truth generator: exact continuous-time simulation of the hidden
// two-atom chain, per-bin photon counts and instantaneous pump pulses.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "telegraph/random.hpp"
#include "telegraph/state_model.hpp"

namespace telegraph {

struct SimConfig {
  TransitionRates rates;
  PhotonCountModel photon_model;
  double bin_time = 1e-3;
  std::uint64_t n_bins = 300;
  HiddenState initial_state = HiddenState::two();
  std::uint64_t rng_seed = 1;

  void validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct PulseSpec {
  Pulse direction = Pulse::Repump;
  double transition_probability = 0.0;
  double nominal_duration = 1.5e-6;  // informational; pulses are instantaneous
};

/// What changed the hidden state.
enum class JumpCause { Spontaneous, Pulse };

struct JumpEvent {
  double time = 0.0;  // seconds since the start of the trace
  HiddenState from;
  HiddenState to;
  JumpCause cause = JumpCause::Spontaneous;
};

/// Total exit rate of a state and the per-target rates out of it.
/// Repump moves 0->1 at 2 Rr and 1->2 at Rr; depump mirrors it with
/// 2->1 at 2 Rd and 1->0 at Rd; the probe adds 2->1 at R21 and 1->0 at R10.
struct ExitRates {
  double down = 0.0;  // alpha -> alpha - 1
  double up = 0.0;    // alpha -> alpha + 1
  double total() const noexcept { return down + up; }
};

ExitRates exit_rates(HiddenState state, const TransitionRates& rates);

/// Exact (Gillespie) evolution over dt. Jumps are appended to `jumps`
/// when given, stamped relative to `t0`.
HiddenState step_continuous(HiddenState state, const TransitionRates& rates, double dt,
                            RandomStream& rng, std::vector<JumpEvent>* jumps = nullptr,
                            double t0 = 0.0);

std::int64_t emit_photons(HiddenState state, const PhotonCountModel& model, RandomStream& rng);

/// Each atom the pulse can address flips independently with probability
/// pulse.transition_probability.
HiddenState apply_pulse(HiddenState state, const PulseSpec& pulse, RandomStream& rng);

/// Invoked once per bin with the finished record; a returned pulse is
/// applied at the end of that bin.
using PulseController = std::function<std::optional<PulseSpec>(const TraceRecord&)>;

/// Simulates n_bins bins: evolve over the bin, count photons from the state
/// at the end of the bin, then let the controller pulse.
std::vector<TraceRecord> run_trace(const SimConfig& config, const PulseController& controller = {},
                                   std::vector<JumpEvent>* jumps = nullptr);

/// Reads out an existing hidden trajectory at a given bin time: the state
/// at the end of each bin, from the jump log, and one count drawn from it.
/// Lets one realization be binned at several bin times.
std::vector<TraceRecord> observe_trajectory(std::span<const JumpEvent> jumps, HiddenState initial,
                                            const PhotonCountModel& model, double bin_time,
                                            std::uint64_t n_bins, RandomStream& rng);

}  // namespace telegraph
