#pragma once

// Feedback policy for steering the belief towards a target distribution
// with short repump / depump pulses.

#include "telegraph/matrix3.hpp"
#include "telegraph/state_model.hpp"

namespace telegraph {

enum class PolicyMode { SimpleThreshold, OptimalT };

struct ControlPolicy {
  PolicyMode mode = PolicyMode::SimpleThreshold;
  double fixed_t_repump = 0.5;
  double fixed_t_depump = 0.5;
  BeliefVector target{{0.0, 1.0, 0.0}};

  void validate() const;

  friend bool operator==(const ControlPolicy&, const ControlPolicy&) = default;
};

struct ControlAction {
  Pulse pulse = Pulse::None;
  double t = 0.0;  // transition probability of the pulse

  friend bool operator==(const ControlAction&, const ControlAction&) = default;
};

struct ControlDecision {
  ControlAction action;
  BeliefVector predicted_belief;  // belief after the pulse
  double distance_before = 0.0;
  double distance_after = 0.0;
};

/// Half the L1 distance between two distributions.
double kolmogorov_distance(const BeliefVector& p, const BeliefVector& q);

/// Pulse matrix for transition probability t. Repump:
///   column 0: ((1-t)^2, 2t(1-t), t^2)
///   column 1: (0, 1-t, t)
///   column 2: (0, 0, 1)
/// Depump is the same matrix with state indices reversed. Pulse::None gives
/// the identity.
Matrix3 pulse_matrix(double t, Pulse direction);

struct OptimalPulse {
  double t = 0.0;
  double distance = 0.0;
};

/// argmin over t in [0, 1] of k(target, M(t) belief). Ties go to the
/// smallest t.
OptimalPulse optimal_pulse_probability(const BeliefVector& belief, const BeliefVector& target,
                                       Pulse direction);

/// Repump if p0 strictly dominates, depump if p2 strictly dominates.
ControlDecision decide_action_simple(const BeliefVector& belief, const ControlPolicy& policy);

/// Best of {none, optimal repump, optimal depump}; exact ties prefer none,
/// then repump.
ControlDecision decide_action_optimal(const BeliefVector& belief, const ControlPolicy& policy);

/// Dispatches on policy.mode.
ControlDecision decide_action(const BeliefVector& belief, const ControlPolicy& policy);

}  // namespace telegraph
