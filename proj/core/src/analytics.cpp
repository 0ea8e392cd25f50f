#include "telegraph/analytics.hpp"

#include <algorithm>
#include <cmath>

#include "telegraph/error.hpp"

namespace telegraph {

std::vector<BeliefVector> integrate_rate_equations(const BeliefVector& p0,
                                                   const TransitionRates& rates, double duration,
                                                   double dt, Propagation mode) {
  if (!(duration > 0.0) || !(dt > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "duration and dt must be > 0");
  }
  const Matrix3 step = mode == Propagation::Exact ? exact_propagator(rates, dt)
                                                  : linearized_propagator(rates, dt);
  const auto steps = static_cast<std::size_t>(std::llround(duration / dt));
  std::vector<BeliefVector> out;
  out.reserve(steps + 1);
  out.push_back(p0);
  BeliefVector p = p0;
  for (std::size_t i = 0; i < steps; ++i) {
    p = apply_pulse_to_belief(p, step);
    out.push_back(p);
  }
  return out;
}

BeliefVector bin_average(std::span<const BeliefVector> trajectory) {
  if (trajectory.size() < 2) throw Error(ErrorKind::Empty, "trajectory has no bins");
  std::array<double, 3> s{};
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    for (int a = 0; a < 3; ++a) s[a] += trajectory[i][a];
  }
  for (auto& x : s) x /= static_cast<double>(trajectory.size() - 1);
  return normalize(s);
}

BeliefVector stationary_distribution(const TransitionRates& r) {
  return normalize({r.r10 * r.r21, 2.0 * r.r_repump * r.r21, 2.0 * r.r_repump * r.r_repump});
}

double optimal_stationary_repump(const TransitionRates& r) {
  return std::sqrt(r.r10 * r.r21 / 2.0);
}

SweepCurve sweep_repump_rate(const TransitionRates& base, std::span<const double> r_values,
                             double duration, double dt) {
  if (r_values.empty()) throw Error(ErrorKind::Empty, "no repump rates to sweep");
  SweepCurve curve;
  const BeliefVector start = BeliefVector::delta(HiddenState::two());
  for (double r : r_values) {
    TransitionRates rates = base;
    rates.r_repump = r;
    rates.r_depump = 0.0;
    const auto traj = integrate_rate_equations(start, rates, duration, dt);
    SweepPoint pt{r, bin_average(traj)[1], stationary_distribution(rates)[1]};
    if (curve.points.empty() || pt.mean_p1 > curve.best_finite.mean_p1) curve.best_finite = pt;
    curve.points.push_back(pt);
  }
  TransitionRates best = base;
  best.r_repump = optimal_stationary_repump(base);
  curve.best_stationary_r = best.r_repump;
  curve.best_stationary_p1 = stationary_distribution(best)[1];
  return curve;
}

OccupancySummary mean_occupancy(std::span<const std::vector<BeliefVector>> traces) {
  OccupancySummary out;
  std::array<double, 3> s{};
  for (const auto& trace : traces) {
    for (const auto& b : trace) {
      for (int a = 0; a < 3; ++a) s[a] += b[a];
    }
    out.n_bins += trace.size();
  }
  if (out.n_bins == 0) throw Error(ErrorKind::Empty, "no beliefs to average");
  for (auto& x : s) x /= static_cast<double>(out.n_bins);
  out.mean_p = normalize(s);
  out.n_traces = traces.size();
  return out;
}

DwellStats dwell_time(std::span<const std::vector<BeliefVector>> traces, HiddenState target,
                      double bin_time) {
  DwellStats out;
  std::vector<double> lengths;
  bool ever_dominant = false;
  for (const auto& trace : traces) {
    std::size_t i = 0;
    while (i < trace.size()) {
      if (trace[i].argmax() != target.value()) {
        ++i;
        continue;
      }
      ever_dominant = true;
      std::size_t j = i;
      while (j < trace.size() && trace[j].argmax() == target.value()) ++j;
      if (i == 0 || j == trace.size()) {
        ++out.n_truncated;
      } else {
        lengths.push_back(static_cast<double>(j - i) * bin_time);
      }
      i = j;
    }
  }
  if (!ever_dominant) throw Error(ErrorKind::NoEpisodes, "target state never dominant");
  out.n_episodes = lengths.size();
  if (lengths.empty()) return out;
  double mean = 0.0;
  for (double x : lengths) mean += x;
  mean /= static_cast<double>(lengths.size());
  double var = 0.0;
  for (double x : lengths) var += (x - mean) * (x - mean);
  if (lengths.size() > 1) var /= static_cast<double>(lengths.size() - 1);
  out.tau = mean;
  out.standard_error = std::sqrt(var / static_cast<double>(lengths.size()));
  return out;
}

RecoveryStats time_to_target(std::span<const std::vector<BeliefVector>> traces, double bin_time,
                             HiddenState target) {
  RecoveryStats out;
  double total = 0.0;
  for (const auto& trace : traces) {
    bool reached = false;
    // Bin index where the current departure started; trace start is -1.
    std::ptrdiff_t departed = -1;
    bool in_target = false;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      const bool dominant = trace[i].argmax() == target.value();
      const auto idx = static_cast<std::ptrdiff_t>(i);
      if (dominant && !in_target) {
        total += static_cast<double>(idx - departed) * bin_time;
        ++out.n_episodes;
        reached = true;
      } else if (!dominant && in_target) {
        departed = idx;
      }
      in_target = dominant;
    }
    if (!reached) throw Error(ErrorKind::NeverReached, "a trace never reaches the target state");
    if (!in_target) ++out.n_censored;
  }
  if (out.n_episodes > 0) out.mean = total / static_cast<double>(out.n_episodes);
  return out;
}

std::vector<double> hidden_dwell_times(std::span<const JumpEvent> jumps, HiddenState initial,
                                       HiddenState target, double duration) {
  std::vector<double> out;
  HiddenState state = initial;
  std::optional<double> entered;  // unknown when the trace starts in target
  for (const auto& jump : jumps) {
    if (jump.time > duration) break;
    if (jump.to == state) continue;
    if (state == target && entered) out.push_back(jump.time - *entered);
    if (jump.to == target) {
      entered = jump.time;
    } else {
      entered.reset();
    }
    state = jump.to;
  }
  return out;
}

KsResult ks_test_exponential(std::span<const double> samples, double mean) {
  if (samples.empty()) throw Error(ErrorKind::Empty, "no samples for the KS test");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = 1.0 - std::exp(-x[i] / mean);
    d = std::max({d, static_cast<double>(i + 1) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  const double root = std::sqrt(n);
  const double lambda = (root + 0.12 + 0.11 / root) * d;
  if (lambda < 0.2) return {d, 1.0};
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return {d, std::clamp(q, 0.0, 1.0)};
}

}  // namespace telegraph
