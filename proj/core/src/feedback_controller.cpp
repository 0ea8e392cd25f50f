#include "telegraph/feedback_controller.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "telegraph/bayes_filter.hpp"
#include "telegraph/error.hpp"

namespace telegraph {

namespace {

constexpr double kTieTolerance = 1e-12;

// c0 + c1 t + c2 t^2
struct Quadratic {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  double operator()(double t) const { return c0 + t * (c1 + t * c2); }
};

// Components of M_repump(t) * b as polynomials in t.
std::array<Quadratic, 3> repumped(const std::array<double, 3>& b) {
  return {{
      {b[0], -2.0 * b[0], b[0]},
      {b[1], 2.0 * b[0] - b[1], -2.0 * b[0]},
      {b[2], b[1], b[0]},
  }};
}

std::array<Quadratic, 3> pulsed(const BeliefVector& belief, Pulse direction) {
  if (direction == Pulse::Repump) return repumped(belief.p);
  const auto r = repumped({belief[2], belief[1], belief[0]});
  return {r[2], r[1], r[0]};
}

void roots_in_unit_interval(const Quadratic& q, std::vector<double>& out) {
  auto keep = [&](double t) {
    if (t > 0.0 && t < 1.0 && std::isfinite(t)) out.push_back(t);
  };
  const double scale = std::abs(q.c0) + std::abs(q.c1) + std::abs(q.c2);
  if (scale == 0.0) return;
  if (std::abs(q.c2) <= 1e-15 * scale) {
    if (q.c1 != 0.0) keep(-q.c0 / q.c1);
    return;
  }
  const double disc = q.c1 * q.c1 - 4.0 * q.c2 * q.c0;
  if (disc < 0.0) return;
  // Numerically stable pair of roots.
  const double s = -0.5 * (q.c1 + std::copysign(std::sqrt(disc), q.c1));
  if (s != 0.0) {
    keep(s / q.c2);
    keep(q.c0 / s);
  } else {
    keep(-q.c1 / (2.0 * q.c2));
  }
}

}  // namespace

void ControlPolicy::validate() const {
  for (double t : {fixed_t_repump, fixed_t_depump}) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "fixed pulse probabilities must lie in [0, 1]");
    }
  }
  if (std::abs(target.sum() - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "control target must be normalized");
  }
}

double kolmogorov_distance(const BeliefVector& p, const BeliefVector& q) {
  return 0.5 * (std::abs(p[0] - q[0]) + std::abs(p[1] - q[1]) + std::abs(p[2] - q[2]));
}

Matrix3 pulse_matrix(double t, Pulse direction) {
  if (direction == Pulse::None) return Matrix3::identity();
  const double u = 1.0 - t;
  Matrix3 m;
  m(0, 0) = u * u;
  m(1, 0) = 2.0 * t * u;
  m(2, 0) = t * t;
  m(1, 1) = u;
  m(2, 1) = t;
  m(2, 2) = 1.0;
  if (direction == Pulse::Repump) return m;
  Matrix3 mirrored;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) mirrored(2 - i, 2 - j) = m(i, j);
  }
  return mirrored;
}

OptimalPulse optimal_pulse_probability(const BeliefVector& belief, const BeliefVector& target,
                                       Pulse direction) {
  if (direction == Pulse::None) return {0.0, kolmogorov_distance(target, belief)};

  // k(t) = 1/2 sum |target - y(t)| is piecewise quadratic; its minimum sits
  // at an endpoint, a sign change of one component, or the vertex of a piece.
  const auto y = pulsed(belief, direction);
  std::array<Quadratic, 3> diff;
  for (int a = 0; a < 3; ++a) {
    diff[a] = {target[a] - y[a].c0, -y[a].c1, -y[a].c2};
  }

  std::vector<double> breaks{0.0, 1.0};
  for (const auto& d : diff) roots_in_unit_interval(d, breaks);
  std::sort(breaks.begin(), breaks.end());

  std::vector<double> candidates = breaks;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double lo = breaks[i], hi = breaks[i + 1];
    if (hi - lo <= 0.0) continue;
    const double mid = 0.5 * (lo + hi);
    Quadratic piece;
    for (const auto& d : diff) {
      const double sign = d(mid) >= 0.0 ? 0.5 : -0.5;
      piece.c0 += sign * d.c0;
      piece.c1 += sign * d.c1;
      piece.c2 += sign * d.c2;
    }
    if (piece.c2 > 0.0) {
      const double vertex = -piece.c1 / (2.0 * piece.c2);
      if (vertex > lo && vertex < hi) candidates.push_back(vertex);
    }
  }

  auto distance_at = [&](double t) {
    return kolmogorov_distance(target, BeliefVector{{y[0](t), y[1](t), y[2](t)}});
  };
  std::sort(candidates.begin(), candidates.end());
  OptimalPulse best{0.0, distance_at(0.0)};
  for (double t : candidates) {
    const double k = distance_at(t);
    if (k < best.distance - kTieTolerance) best = {t, k};
  }
  return best;
}

namespace {

ControlDecision make_decision(const BeliefVector& belief, const BeliefVector& target,
                              ControlAction action) {
  ControlDecision d;
  d.action = action;
  d.distance_before = kolmogorov_distance(target, belief);
  d.predicted_belief = action.pulse == Pulse::None
                           ? belief
                           : apply_pulse_to_belief(belief, pulse_matrix(action.t, action.pulse));
  d.distance_after = kolmogorov_distance(target, d.predicted_belief);
  return d;
}

}  // namespace

ControlDecision decide_action_simple(const BeliefVector& belief, const ControlPolicy& policy) {
  ControlAction action;
  if (belief[0] > belief[1] && belief[0] > belief[2]) {
    action = {Pulse::Repump, policy.fixed_t_repump};
  } else if (belief[2] > belief[0] && belief[2] > belief[1]) {
    action = {Pulse::Depump, policy.fixed_t_depump};
  }
  return make_decision(belief, policy.target, action);
}

ControlDecision decide_action_optimal(const BeliefVector& belief, const ControlPolicy& policy) {
  const double k_none = kolmogorov_distance(policy.target, belief);
  const auto up = optimal_pulse_probability(belief, policy.target, Pulse::Repump);
  const auto down = optimal_pulse_probability(belief, policy.target, Pulse::Depump);

  ControlAction action;
  double best = k_none;
  if (up.distance < best - kTieTolerance) {
    action = {Pulse::Repump, up.t};
    best = up.distance;
  }
  if (down.distance < best - kTieTolerance) {
    action = {Pulse::Depump, down.t};
  }
  return make_decision(belief, policy.target, action);
}

ControlDecision decide_action(const BeliefVector& belief, const ControlPolicy& policy) {
  return policy.mode == PolicyMode::OptimalT ? decide_action_optimal(belief, policy)
                                             : decide_action_simple(belief, policy);
}

}  // namespace telegraph
