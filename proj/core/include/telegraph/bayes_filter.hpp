#pragma once

// Per-bin belief update for the hidden three-state chain: Bayes posterior
// from a photon count, linearized rate-equation prediction between bins,
// and the belief transformation caused by a pump pulse.

#include <span>
#include <vector>

#include "telegraph/matrix3.hpp"
#include "telegraph/state_model.hpp"

namespace telegraph {

enum class Propagation {
  Linearized,  // 1 + dt * G, valid for rates well below 1/dt
  Exact,       // exp(dt * G); oracle mode
};

/// Pulse transition probabilities the filter assumes for pulses recorded in
/// a trace.
struct PulseStrengths {
  double t_repump = 0.0;
  double t_depump = 0.0;

  friend bool operator==(const PulseStrengths&, const PulseStrengths&) = default;
};

struct FilterConfig {
  PhotonCountModel photon_model;
  TransitionRates rates;
  double bin_time = 1e-3;
  BeliefVector initial_belief = BeliefVector::delta(HiddenState::two());
  PulseStrengths pulses;
  Propagation propagation = Propagation::Linearized;

  void validate() const;

  friend bool operator==(const FilterConfig&, const FilterConfig&) = default;
};

/// Rate-equation generator. Columns are the source state:
///   column 0: (-2 Rr, 2 Rr, 0)
///   column 1: (R10, -R10 - Rr, Rr)
///   column 2: (0, R21, -R21)
/// The depump rate does not enter; depumping acts through pulses only.
Matrix3 rate_generator(const TransitionRates& rates);

/// Largest diagonal rate of the generator times dt.
double linearization_parameter(const TransitionRates& rates, double dt);

/// True when every diagonal rate times dt is below 0.5.
bool linearization_valid(const TransitionRates& rates, double dt);

/// 1 + dt * G. Throws GuardViolated outside the validity range.
Matrix3 linearized_propagator(const TransitionRates& rates, double dt);

/// exp(dt * G).
Matrix3 exact_propagator(const TransitionRates& rates, double dt);

BeliefVector posterior_update(const BeliefVector& prior, std::int64_t n,
                              const PhotonCountModel& model);

BeliefVector propagate_prior(const BeliefVector& posterior, const TransitionRates& rates,
                             double dt);

BeliefVector propagate_exact(const BeliefVector& posterior, const TransitionRates& rates,
                             double dt);

/// Throws NotStochastic if a column sum is off by more than 1e-9 or an
/// entry is negative.
BeliefVector apply_pulse_to_belief(const BeliefVector& belief, const Matrix3& matrix);

/// Streaming form of the filter, one photon count per step.
class BayesFilter {
 public:
  explicit BayesFilter(FilterConfig config);

  /// Predicts the prior for the coming bin, then conditions on its count.
  /// Returns the posterior of that bin.
  const BeliefVector& observe(std::int64_t n);

  /// Applies a pulse to the current posterior.
  void apply_pulse(Pulse pulse);
  void apply_pulse(const Matrix3& matrix);

  const BeliefVector& belief() const noexcept { return belief_; }

  /// Sum of log p(n_i | n_1..n_{i-1}) over all observed bins.
  double log_evidence() const noexcept { return log_evidence_; }
  std::size_t bins() const noexcept { return bins_; }

  const FilterConfig& config() const noexcept { return config_; }

 private:
  FilterConfig config_;
  Matrix3 propagator_;
  BeliefVector belief_;
  double log_evidence_ = 0.0;
  std::size_t bins_ = 0;
};

/// Posterior of every bin (before any pulse of that bin is applied).
std::vector<BeliefVector> run_filter(std::span<const TraceRecord> records,
                                     const FilterConfig& config);

/// Mean per-bin log predictive likelihood of the counts under the config.
double mean_log_likelihood(std::span<const TraceRecord> records, const FilterConfig& config);

}  // namespace telegraph
