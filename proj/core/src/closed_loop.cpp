#include "telegraph/closed_loop.hpp"

#include <array>

#include "telegraph/ensemble.hpp"

namespace telegraph {

FilterConfig matched_filter_config(const SimConfig& sim) {
  FilterConfig f;
  f.photon_model = sim.photon_model;
  f.rates = sim.rates;
  f.bin_time = sim.bin_time;
  f.initial_belief = BeliefVector::delta(sim.initial_state);
  return f;
}

ClosedLoopRun run_closed_loop(const SimConfig& sim, const FilterConfig& filter_config,
                              const ControlPolicy& policy) {
  policy.validate();
  ClosedLoopRun run;
  run.posteriors.reserve(sim.n_bins);
  run.actions.reserve(sim.n_bins);
  BayesFilter filter(filter_config);

  auto controller = [&](const TraceRecord& rec) -> std::optional<PulseSpec> {
    const BeliefVector& posterior = filter.observe(rec.photon_count);
    run.posteriors.push_back(posterior);
    const ControlDecision decision = decide_action(posterior, policy);
    run.actions.push_back(decision.action);
    if (decision.action.pulse == Pulse::None) return std::nullopt;
    filter.apply_pulse(pulse_matrix(decision.action.t, decision.action.pulse));
    return PulseSpec{decision.action.pulse, decision.action.t};
  };
  run.records = run_trace(sim, controller, &run.jumps);
  return run;
}

TuningResult tune_fixed_pulse(const SimConfig& sim, const FilterConfig& filter_config,
                              const ControlPolicy& policy, std::size_t n_traces,
                              std::uint64_t seed, std::span<const double> candidates) {
  static constexpr std::array<double, 9> kDefaultCandidates{0.1, 0.2, 0.3, 0.4, 0.5,
                                                            0.6, 0.7, 0.8, 0.9};
  if (candidates.empty()) candidates = kDefaultCandidates;

  TuningResult result;
  result.candidates.assign(candidates.begin(), candidates.end());
  for (double t : candidates) {
    ControlPolicy p = policy;
    p.mode = PolicyMode::SimpleThreshold;
    p.fixed_t_repump = p.fixed_t_depump = t;
    const auto scores = run_ensemble(n_traces, seed, [&](std::size_t, std::uint64_t s) {
      SimConfig c = sim;
      c.rng_seed = s;
      const auto run = run_closed_loop(c, filter_config, p);
      double acc = 0.0;
      for (const auto& b : run.posteriors) acc += 1.0 - kolmogorov_distance(p.target, b);
      return acc / static_cast<double>(run.posteriors.size());
    });
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= static_cast<double>(scores.size());
    result.scores.push_back(mean);
    if (result.scores.size() == 1 || mean > result.mean_p1) {
      result.t = t;
      result.mean_p1 = mean;
    }
  }
  return result;
}

}  // namespace telegraph
