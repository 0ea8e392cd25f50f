#include "telegraph/bayes_filter.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "telegraph/error.hpp"
#include "telegraph/feedback_controller.hpp"

namespace telegraph {

void FilterConfig::validate() const {
  photon_model.validate();
  rates.validate();
  if (!(bin_time > 0.0)) throw Error(ErrorKind::InvalidArgument, "filter bin_time must be > 0");
  if (std::abs(initial_belief.sum() - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "initial belief must be normalized");
  }
  for (double t : {pulses.t_repump, pulses.t_depump}) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "pulse transition probabilities must lie in [0, 1]");
    }
  }
  if (propagation == Propagation::Linearized && !linearization_valid(rates, bin_time)) {
    std::ostringstream msg;
    msg << "rates x bin_time = " << linearization_parameter(rates, bin_time)
        << " exceeds the linearization limit 0.5";
    throw Error(ErrorKind::GuardViolated, msg.str());
  }
}

Matrix3 rate_generator(const TransitionRates& r) {
  Matrix3 g;
  g(0, 0) = -2.0 * r.r_repump;
  g(1, 0) = 2.0 * r.r_repump;
  g(0, 1) = r.r10;
  g(1, 1) = -r.r10 - r.r_repump;
  g(2, 1) = r.r_repump;
  g(1, 2) = r.r21;
  g(2, 2) = -r.r21;
  return g;
}

double linearization_parameter(const TransitionRates& r, double dt) {
  return std::max({2.0 * r.r_repump, r.r10 + r.r_repump, r.r21}) * dt;
}

bool linearization_valid(const TransitionRates& rates, double dt) {
  return linearization_parameter(rates, dt) < 0.5;
}

Matrix3 linearized_propagator(const TransitionRates& rates, double dt) {
  if (!linearization_valid(rates, dt)) {
    std::ostringstream msg;
    msg << "linearized propagation invalid: rates x dt = " << linearization_parameter(rates, dt);
    throw Error(ErrorKind::GuardViolated, msg.str());
  }
  const Matrix3 g = rate_generator(rates);
  Matrix3 step = Matrix3::identity();
  for (std::size_t i = 0; i < 9; ++i) step.m[i] += dt * g.m[i];
  return step;
}

Matrix3 exact_propagator(const TransitionRates& rates, double dt) {
  return expm(dt * rate_generator(rates));
}

BeliefVector posterior_update(const BeliefVector& prior, std::int64_t n,
                              const PhotonCountModel& model) {
  const auto lik = scaled_likelihoods(model, n);
  return normalize({lik[0] * prior[0], lik[1] * prior[1], lik[2] * prior[2]});
}

namespace {

BeliefVector apply(const Matrix3& m, const BeliefVector& b) {
  auto v = m * b.p;
  for (auto& x : v) x = std::max(x, 0.0);
  return normalize(v);
}

}  // namespace

BeliefVector propagate_prior(const BeliefVector& posterior, const TransitionRates& rates,
                             double dt) {
  if (dt == 0.0) return posterior;
  return apply(linearized_propagator(rates, dt), posterior);
}

BeliefVector propagate_exact(const BeliefVector& posterior, const TransitionRates& rates,
                             double dt) {
  if (dt == 0.0) return posterior;
  return apply(exact_propagator(rates, dt), posterior);
}

BeliefVector apply_pulse_to_belief(const BeliefVector& belief, const Matrix3& matrix) {
  for (double x : matrix.m) {
    if (x < 0.0) throw Error(ErrorKind::NotStochastic, "pulse matrix has a negative entry");
  }
  if (column_sum_defect(matrix) > 1e-9) {
    throw Error(ErrorKind::NotStochastic, "pulse matrix columns do not sum to 1");
  }
  return apply(matrix, belief);
}

BayesFilter::BayesFilter(FilterConfig config)
    : config_(std::move(config)), belief_(config_.initial_belief) {
  config_.validate();
  propagator_ = config_.propagation == Propagation::Exact
                    ? exact_propagator(config_.rates, config_.bin_time)
                    : linearized_propagator(config_.rates, config_.bin_time);
}

const BeliefVector& BayesFilter::observe(std::int64_t n) {
  const BeliefVector prior = apply(propagator_, belief_);
  double log_scale = 0.0;
  const auto lik = scaled_likelihoods(config_.photon_model, n, &log_scale);
  const double evidence = lik[0] * prior[0] + lik[1] * prior[1] + lik[2] * prior[2];
  log_evidence_ += log_scale + std::log(evidence);
  belief_ = normalize({lik[0] * prior[0], lik[1] * prior[1], lik[2] * prior[2]});
  ++bins_;
  return belief_;
}

void BayesFilter::apply_pulse(Pulse pulse) {
  switch (pulse) {
    case Pulse::None: return;
    case Pulse::Repump: apply_pulse(pulse_matrix(config_.pulses.t_repump, Pulse::Repump)); return;
    case Pulse::Depump: apply_pulse(pulse_matrix(config_.pulses.t_depump, Pulse::Depump)); return;
  }
}

void BayesFilter::apply_pulse(const Matrix3& matrix) {
  belief_ = apply_pulse_to_belief(belief_, matrix);
}

std::vector<BeliefVector> run_filter(std::span<const TraceRecord> records,
                                     const FilterConfig& config) {
  std::vector<BeliefVector> out;
  out.reserve(records.size());
  BayesFilter filter(config);
  for (const auto& rec : records) {
    out.push_back(filter.observe(rec.photon_count));
    filter.apply_pulse(rec.pulse);
  }
  return out;
}

double mean_log_likelihood(std::span<const TraceRecord> records, const FilterConfig& config) {
  if (records.empty()) throw Error(ErrorKind::Empty, "no records to score");
  BayesFilter filter(config);
  for (const auto& rec : records) {
    filter.observe(rec.photon_count);
    filter.apply_pulse(rec.pulse);
  }
  return filter.log_evidence() / static_cast<double>(records.size());
}

}  // namespace telegraph
