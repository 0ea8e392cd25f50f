#include "telegraph/telegraph_simulator.hpp"

#include <cmath>

#include "telegraph/error.hpp"

namespace telegraph {

void SimConfig::validate() const {
  rates.validate();
  photon_model.validate();
  if (!(bin_time > 0.0) || !std::isfinite(bin_time)) {
    throw Error(ErrorKind::InvalidArgument, "sim bin_time must be > 0");
  }
  if (n_bins == 0) throw Error(ErrorKind::InvalidArgument, "sim n_bins must be > 0");
  if (std::abs(photon_model.bin_time - bin_time) > 1e-12 * bin_time) {
    throw Error(ErrorKind::InvalidArgument, "photon model and simulator disagree on bin_time");
  }
}

ExitRates exit_rates(HiddenState state, const TransitionRates& r) {
  switch (state.value()) {
    case 0: return {0.0, 2.0 * r.r_repump};
    case 1: return {r.r10 + r.r_depump, r.r_repump};
    default: return {r.r21 + 2.0 * r.r_depump, 0.0};
  }
}

HiddenState step_continuous(HiddenState state, const TransitionRates& rates, double dt,
                            RandomStream& rng, std::vector<JumpEvent>* jumps, double t0) {
  double t = 0.0;
  for (;;) {
    const ExitRates out = exit_rates(state, rates);
    const double total = out.total();
    if (total <= 0.0) return state;
    t += rng.exponential(total);
    if (t >= dt) return state;
    const bool up = rng.uniform() * total < out.up;
    const HiddenState next(state.value() + (up ? 1 : -1));
    if (jumps != nullptr) jumps->push_back({t0 + t, state, next, JumpCause::Spontaneous});
    state = next;
  }
}

std::int64_t emit_photons(HiddenState state, const PhotonCountModel& model, RandomStream& rng) {
  const double mean = model.mean_counts[state.value()];
  if (model.family == CountFamily::OverDispersed) return rng.negative_binomial(mean, model.fano);
  return rng.poisson(mean);
}

HiddenState apply_pulse(HiddenState state, const PulseSpec& pulse, RandomStream& rng) {
  const double t = pulse.transition_probability;
  int alpha = state.value();
  switch (pulse.direction) {
    case Pulse::None: return state;
    case Pulse::Repump: {
      const int down_atoms = 2 - alpha;
      for (int i = 0; i < down_atoms; ++i) alpha += rng.bernoulli(t) ? 1 : 0;
      break;
    }
    case Pulse::Depump: {
      const int up_atoms = alpha;
      for (int i = 0; i < up_atoms; ++i) alpha -= rng.bernoulli(t) ? 1 : 0;
      break;
    }
  }
  return HiddenState(alpha);
}

std::vector<TraceRecord> run_trace(const SimConfig& config, const PulseController& controller,
                                   std::vector<JumpEvent>* jumps) {
  config.validate();
  RandomStream rng(config.rng_seed);
  std::vector<TraceRecord> records;
  records.reserve(config.n_bins);
  HiddenState state = config.initial_state;
  for (std::uint64_t bin = 0; bin < config.n_bins; ++bin) {
    const double t0 = static_cast<double>(bin) * config.bin_time;
    state = step_continuous(state, config.rates, config.bin_time, rng, jumps, t0);
    TraceRecord rec;
    rec.bin_index = bin;
    rec.photon_count = emit_photons(state, config.photon_model, rng);
    rec.true_state = state;
    if (controller) {
      if (const auto pulse = controller(rec); pulse && pulse->direction != Pulse::None) {
        rec.pulse = pulse->direction;
        const HiddenState before = state;
        state = apply_pulse(state, *pulse, rng);
        if (jumps != nullptr && !(state == before)) {
          jumps->push_back({t0 + config.bin_time, before, state, JumpCause::Pulse});
        }
      }
    }
    records.push_back(rec);
  }
  return records;
}

std::vector<TraceRecord> observe_trajectory(std::span<const JumpEvent> jumps, HiddenState initial,
                                            const PhotonCountModel& model, double bin_time,
                                            std::uint64_t n_bins, RandomStream& rng) {
  if (!(bin_time > 0.0)) throw Error(ErrorKind::InvalidArgument, "bin_time must be > 0");
  std::vector<TraceRecord> records;
  records.reserve(n_bins);
  HiddenState state = initial;
  std::size_t next = 0;
  for (std::uint64_t bin = 0; bin < n_bins; ++bin) {
    const double end = static_cast<double>(bin + 1) * bin_time;
    while (next < jumps.size() && jumps[next].time <= end) state = jumps[next++].to;
    TraceRecord rec;
    rec.bin_index = bin;
    rec.photon_count = emit_photons(state, model, rng);
    rec.true_state = state;
    records.push_back(rec);
  }
  return records;
}

}  // namespace telegraph
