#include "telegraph/rate_grid_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "telegraph/bayes_filter.hpp"
#include "telegraph/error.hpp"

namespace telegraph {

double AxisSpec::value(std::size_t i) const {
  if (n_points <= 1) return min;
  return min + (max - min) * static_cast<double>(i) / static_cast<double>(n_points - 1);
}

void AxisSpec::validate(const char* name) const {
  std::ostringstream msg;
  if (n_points == 0) {
    msg << name << ": grid axis needs at least one point";
  } else if (!(min >= 0.0) || !std::isfinite(max)) {
    msg << name << ": grid bounds must be finite and >= 0";
  } else if (n_points >= 2 && !(max > min)) {
    msg << name << ": grid max must exceed min";
  } else {
    return;
  }
  throw Error(ErrorKind::InvalidArgument, msg.str());
}

const AxisSpec& GridSpec::axis(RateAxis a) const {
  switch (a) {
    case RateAxis::R21: return r21;
    case RateAxis::R10: return r10;
    case RateAxis::Repump: return r_repump;
  }
  return r21;
}

void GridSpec::validate() const {
  r21.validate("r21");
  r10.validate("r10");
  r_repump.validate("r_repump");
  if (total_cells() > max_cells) {
    std::ostringstream msg;
    msg << "rate grid needs " << total_cells() << " cells, cap is " << max_cells;
    throw Error(ErrorKind::CapExceeded, msg.str());
  }
}

GridSpec GridSpec::single_cell(const TransitionRates& rates) {
  GridSpec s;
  s.r21 = {rates.r21, rates.r21, 1};
  s.r10 = {rates.r10, rates.r10, 1};
  s.r_repump = {rates.r_repump, rates.r_repump, 1};
  return s;
}

RateGrid::RateGrid(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  for (auto& slab : prob_) slab.assign(spec_.rate_cells(), 0.0);
}

std::size_t RateGrid::cell(std::size_t i21, std::size_t i10, std::size_t ir) const {
  return (i21 * spec_.r10.n_points + i10) * spec_.r_repump.n_points + ir;
}

RateGrid RateGrid::init_flat(const GridSpec& spec, const BeliefVector& initial_states) {
  RateGrid g(spec);
  const double per_cell = 1.0 / static_cast<double>(spec.rate_cells());
  for (int a = 0; a < kNumStates; ++a) {
    std::fill(g.prob_[a].begin(), g.prob_[a].end(), initial_states[a] * per_cell);
  }
  return g;
}

void RateGrid::prepare_propagators(double dt, Propagation mode) {
  if (dt == prop_dt_ && mode == prop_mode_ && !propagators_.empty()) return;
  propagators_.resize(spec_.rate_cells());
  for (std::size_t i21 = 0; i21 < spec_.r21.n_points; ++i21) {
    for (std::size_t i10 = 0; i10 < spec_.r10.n_points; ++i10) {
      for (std::size_t ir = 0; ir < spec_.r_repump.n_points; ++ir) {
        const TransitionRates r{spec_.r21.value(i21), spec_.r10.value(i10),
                                spec_.r_repump.value(ir), 0.0};
        propagators_[cell(i21, i10, ir)] = mode == Propagation::Exact
                                               ? exact_propagator(r, dt)
                                               : linearized_propagator(r, dt);
      }
    }
  }
  prop_dt_ = dt;
  prop_mode_ = mode;
}

void RateGrid::update(std::int64_t n, const PhotonCountModel& model, double dt,
                      Propagation mode) {
  if (mode == Propagation::Linearized) {
    // The fastest rates of the grid sit in its last corner.
    const TransitionRates corner{spec_.r21.value(spec_.r21.n_points - 1),
                                 spec_.r10.value(spec_.r10.n_points - 1),
                                 spec_.r_repump.value(spec_.r_repump.n_points - 1), 0.0};
    if (!linearization_valid(corner, dt)) {
      std::ostringstream msg;
      msg << "grid rates x dt = " << linearization_parameter(corner, dt)
          << " exceed the linearization limit 0.5";
      throw Error(ErrorKind::GuardViolated, msg.str());
    }
  }
  prepare_propagators(dt, mode);
  const auto lik = scaled_likelihoods(model, n);

  const std::size_t cells = spec_.rate_cells();
  double* p0 = prob_[0].data();
  double* p1 = prob_[1].data();
  double* p2 = prob_[2].data();
  double total = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const auto& m = propagators_[i].m;
    const double x0 = p0[i], x1 = p1[i], x2 = p2[i];
    p0[i] = lik[0] * (m[0] * x0 + m[1] * x1 + m[2] * x2);
    p1[i] = lik[1] * (m[3] * x0 + m[4] * x1 + m[5] * x2);
    p2[i] = lik[2] * (m[6] * x0 + m[7] * x1 + m[8] * x2);
    total += p0[i] + p1[i] + p2[i];
  }
  if (!(total > 0.0)) throw Error(ErrorKind::AllZero, "rate grid underflowed to zero");

  constexpr double kFloor = 1e-300;
  const double inv = 1.0 / total;
  for (auto& slab : prob_) {
    for (auto& x : slab) {
      x *= inv;
      if (x < kFloor) x = 0.0;
    }
  }
}

BeliefVector RateGrid::marginal_states() const {
  std::array<double, 3> s{};
  for (int a = 0; a < kNumStates; ++a) {
    for (double x : prob_[a]) s[a] += x;
  }
  return normalize(s);
}

std::vector<double> RateGrid::marginal_distribution(RateAxis axis) const {
  const auto& ax = spec_.axis(axis);
  std::vector<double> out(ax.n_points, 0.0);
  for (std::size_t i21 = 0; i21 < spec_.r21.n_points; ++i21) {
    for (std::size_t i10 = 0; i10 < spec_.r10.n_points; ++i10) {
      for (std::size_t ir = 0; ir < spec_.r_repump.n_points; ++ir) {
        const std::size_t c = cell(i21, i10, ir);
        const double mass = prob_[0][c] + prob_[1][c] + prob_[2][c];
        switch (axis) {
          case RateAxis::R21: out[i21] += mass; break;
          case RateAxis::R10: out[i10] += mass; break;
          case RateAxis::Repump: out[ir] += mass; break;
        }
      }
    }
  }
  double s = 0.0;
  for (double x : out) s += x;
  if (s > 0.0) {
    for (double& x : out) x /= s;
  }
  return out;
}

RatePosterior RateGrid::marginal_rate(RateAxis axis) const {
  const auto& ax = spec_.axis(axis);
  const auto m = marginal_distribution(axis);
  double mean = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) mean += m[i] * ax.value(i);
  double var = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double d = ax.value(i) - mean;
    var += m[i] * d * d;
  }
  return {mean, std::sqrt(var)};
}

std::array<RatePosterior, 3> RateGrid::marginal_rates() const {
  return {marginal_rate(RateAxis::R21), marginal_rate(RateAxis::R10),
          marginal_rate(RateAxis::Repump)};
}

bool RateGrid::stopping_check(double threshold) const {
  bool ok = true;
  for (const auto& r : marginal_rates()) {
    if (r.mean == 0.0) {
      if (r.rms > 0.0) throw Error(ErrorKind::ZeroMean, "rate marginal has zero mean");
      ok = false;
      continue;
    }
    if (r.rms / r.mean > threshold) ok = false;
  }
  return ok;
}

double RateGrid::joint(int alpha, std::size_t i21, std::size_t i10, std::size_t ir) const {
  return prob_[static_cast<std::size_t>(alpha)][cell(i21, i10, ir)];
}

double RateGrid::total() const {
  double s = 0.0;
  for (const auto& slab : prob_) {
    for (double x : slab) s += x;
  }
  return s;
}

RateEstimate estimate_rates(std::span<const TraceRecord> records, const GridSpec& spec,
                            const PhotonCountModel& model, double dt,
                            const EstimationOptions& options) {
  RateGrid grid = RateGrid::init_flat(spec, options.initial_states);
  RateEstimate est;
  auto snapshot = [&](double time) {
    GridSnapshot s;
    s.time = time;
    for (int a = 0; a < 3; ++a) s.marginals[a] = grid.marginal_distribution(RateAxis(a));
    est.snapshots.push_back(std::move(s));
  };
  if (options.snapshot_every > 0) snapshot(0.0);

  const std::size_t check_every = std::max<std::size_t>(options.check_every, 1);
  if (grid.stopping_check(options.stop_threshold)) {
    est.converged = true;
    est.stop_time = 0.0;
    est.rates = grid.marginal_rates();
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (est.converged && options.stop_at_convergence) break;
    grid.update(records[i].photon_count, model, dt, options.propagation);
    ++est.bins_used;
    const std::size_t done = i + 1;
    const double time = static_cast<double>(done) * dt;
    if (options.snapshot_every > 0 && done % options.snapshot_every == 0) snapshot(time);
    if (!est.converged && (done % check_every == 0 || done == records.size()) &&
        grid.stopping_check(options.stop_threshold)) {
      est.converged = true;
      est.stop_time = time;
      est.rates = grid.marginal_rates();
    }
  }
  est.final_rates = grid.marginal_rates();
  if (!est.converged) est.rates = est.final_rates;
  est.final_states = grid.marginal_states();
  return est;
}

}  // namespace telegraph
