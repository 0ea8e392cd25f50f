#include "telegraph/state_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "telegraph/error.hpp"

namespace telegraph {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::AllZero: return "AllZero";
    case ErrorKind::GuardViolated: return "GuardViolated";
    case ErrorKind::NotStochastic: return "NotStochastic";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::ZeroMean: return "ZeroMean";
    case ErrorKind::Empty: return "Empty";
    case ErrorKind::NoEpisodes: return "NoEpisodes";
    case ErrorKind::NeverReached: return "NeverReached";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

HiddenState::HiddenState(int alpha) : alpha_(alpha) {
  if (alpha < 0 || alpha >= kNumStates) {
    throw Error(ErrorKind::InvalidArgument,
                "hidden state must be 0, 1 or 2, got " + std::to_string(alpha));
  }
}

int BeliefVector::argmax() const noexcept {
  int best = 0;
  for (int a = 1; a < kNumStates; ++a) {
    if ((*this)[a] > (*this)[best]) best = a;
  }
  return best;
}

BeliefVector BeliefVector::delta(HiddenState s) {
  BeliefVector b{{0.0, 0.0, 0.0}};
  b[s.value()] = 1.0;
  return b;
}

BeliefVector BeliefVector::uniform() {
  return BeliefVector{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
}

double TransitionRates::max_rate() const noexcept {
  return std::max({r21, r10, r_repump, r_depump});
}

void TransitionRates::validate() const {
  for (double r : {r21, r10, r_repump, r_depump}) {
    if (!std::isfinite(r) || r < 0.0) {
      throw Error(ErrorKind::InvalidArgument, "transition rates must be finite and >= 0");
    }
  }
}

PhotonCountModel PhotonCountModel::from_rates(const std::array<double, kNumStates>& rates_per_s,
                                              double bin_time, CountFamily family, double fano) {
  PhotonCountModel m;
  for (int a = 0; a < kNumStates; ++a) m.mean_counts[a] = rates_per_s[a] * bin_time;
  m.family = family;
  m.fano = family == CountFamily::Poisson ? 1.0 : fano;
  m.bin_time = bin_time;
  return m;
}

PhotonCountModel PhotonCountModel::rescaled(double new_bin_time) const {
  PhotonCountModel m = *this;
  for (auto& mean : m.mean_counts) mean *= new_bin_time / bin_time;
  m.bin_time = new_bin_time;
  return m;
}

void PhotonCountModel::validate() const {
  if (!(bin_time > 0.0) || !std::isfinite(bin_time)) {
    throw Error(ErrorKind::InvalidArgument, "photon model bin_time must be > 0");
  }
  for (double m : mean_counts) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw Error(ErrorKind::InvalidArgument, "mean counts must be finite and >= 0");
    }
  }
  if (!(mean_counts[0] > mean_counts[1] && mean_counts[1] > mean_counts[2])) {
    throw Error(ErrorKind::InvalidArgument,
                "mean counts must strictly decrease with the number of coupled atoms");
  }
  if (family == CountFamily::OverDispersed && !(fano > 1.0 && std::isfinite(fano))) {
    throw Error(ErrorKind::InvalidArgument, "over-dispersed model needs fano > 1");
  }
}

const char* to_string(Pulse pulse) {
  switch (pulse) {
    case Pulse::None: return "none";
    case Pulse::Repump: return "repump";
    case Pulse::Depump: return "depump";
  }
  return "?";
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_poisson(double mean, std::int64_t n) {
  if (mean == 0.0) return n == 0 ? 0.0 : kNegInf;
  const double k = static_cast<double>(n);
  return k * std::log(mean) - mean - std::lgamma(k + 1.0);
}

// Negative binomial with the given mean and variance = fano * mean:
// shape r = mean / (fano - 1), success ratio q = (fano - 1) / fano.
double log_negative_binomial(double mean, double fano, std::int64_t n) {
  if (mean == 0.0) return n == 0 ? 0.0 : kNegInf;
  const double excess = fano - 1.0;
  const double r = mean / excess;
  const double k = static_cast<double>(n);
  // log Gamma(n + r) - log Gamma(r), summed directly while it is cheap so
  // that huge r (fano close to 1) does not cancel catastrophically.
  double log_rising = 0.0;
  if (n <= 4096) {
    for (std::int64_t i = 0; i < n; ++i) log_rising += std::log(r + static_cast<double>(i));
  } else {
    log_rising = std::lgamma(k + r) - std::lgamma(r);
  }
  const double log_q = std::log(excess) - std::log(fano);
  return log_rising - std::lgamma(k + 1.0) - r * std::log1p(excess) + k * log_q;
}

}  // namespace

double log_likelihood(const PhotonCountModel& model, std::int64_t n, HiddenState alpha) {
  if (n < 0) return kNegInf;
  const double mean = model.mean_counts[alpha.value()];
  if (model.family == CountFamily::OverDispersed) {
    return log_negative_binomial(mean, model.fano, n);
  }
  return log_poisson(mean, n);
}

double likelihood(const PhotonCountModel& model, std::int64_t n, HiddenState alpha) {
  return std::exp(log_likelihood(model, n, alpha));
}

std::array<double, kNumStates> scaled_likelihoods(const PhotonCountModel& model, std::int64_t n,
                                                  double* log_scale) {
  std::array<double, kNumStates> logs{};
  double top = kNegInf;
  for (int a = 0; a < kNumStates; ++a) {
    logs[a] = log_likelihood(model, n, HiddenState(a));
    top = std::max(top, logs[a]);
  }
  if (log_scale != nullptr) *log_scale = top;
  std::array<double, kNumStates> out{};
  if (top == kNegInf) return out;  // impossible count under every state
  for (int a = 0; a < kNumStates; ++a) out[a] = std::exp(logs[a] - top);
  return out;
}

BeliefVector normalize(const std::array<double, kNumStates>& v) {
  constexpr double kFloor = 1e-300;
  BeliefVector b{v};
  for (auto& x : b.p) {
    if (!(x >= 0.0) || std::isinf(x)) {
      throw Error(ErrorKind::InvalidArgument, "belief components must be finite and >= 0");
    }
    if (x < kFloor) x = 0.0;
  }
  const double s = b.sum();
  if (!(s > 0.0)) {
    throw Error(ErrorKind::AllZero, "belief normalization underflowed to zero");
  }
  if (std::abs(s - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) return b;
  for (auto& x : b.p) x /= s;
  return b;
}

}  // namespace telegraph
