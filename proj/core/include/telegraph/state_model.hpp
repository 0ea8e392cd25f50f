#pragma once

// Domain types shared by the simulator, the filters and the controller:
// the hidden two-atom state, belief vectors, rate sets and the per-bin
// photon count model.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace telegraph {

inline constexpr int kNumStates = 3;

/// Number of atoms in the spin-up state, alpha in {0, 1, 2}.
class HiddenState {
 public:
  constexpr HiddenState() = default;
  explicit HiddenState(int alpha);

  static HiddenState zero() { return HiddenState(0); }
  static HiddenState one() { return HiddenState(1); }
  static HiddenState two() { return HiddenState(2); }

  constexpr int value() const noexcept { return alpha_; }

  friend constexpr bool operator==(HiddenState, HiddenState) = default;

 private:
  int alpha_ = 2;
};

/// Occupation probabilities (p0, p1, p2). Produced by normalize() or by
/// operations that preserve normalization.
struct BeliefVector {
  std::array<double, kNumStates> p{0.0, 0.0, 1.0};

  double operator[](int alpha) const { return p[static_cast<std::size_t>(alpha)]; }
  double& operator[](int alpha) { return p[static_cast<std::size_t>(alpha)]; }

  double sum() const noexcept { return p[0] + p[1] + p[2]; }

  /// Index of the largest component; ties resolve to the lower index.
  int argmax() const noexcept;

  static BeliefVector delta(HiddenState s);
  static BeliefVector uniform();

  friend bool operator==(const BeliefVector&, const BeliefVector&) = default;
};

/// Rates in 1/s. r21 and r10 are the probe-induced decays, r_repump and
/// r_depump the continuous pump drives.
struct TransitionRates {
  double r21 = 0.0;
  double r10 = 0.0;
  double r_repump = 0.0;
  double r_depump = 0.0;

  double max_rate() const noexcept;
  void validate() const;

  friend bool operator==(const TransitionRates&, const TransitionRates&) = default;
};

enum class CountFamily { Poisson, OverDispersed };

/// Per-state photon count distribution for a single bin.
struct PhotonCountModel {
  std::array<double, kNumStates> mean_counts{40.0, 28.0, 16.0};
  CountFamily family = CountFamily::Poisson;
  double fano = 1.0;  // variance / mean, only used by OverDispersed
  double bin_time = 1e-3;

  /// Builds a model from per-state count rates (photons per second).
  static PhotonCountModel from_rates(const std::array<double, kNumStates>& rates_per_s,
                                     double bin_time, CountFamily family = CountFamily::Poisson,
                                     double fano = 1.0);

  /// Same count rates, different bin length.
  PhotonCountModel rescaled(double new_bin_time) const;

  /// Throws InvalidArgument unless means are strictly decreasing in alpha,
  /// non-negative and the fano factor matches the family.
  void validate() const;

  friend bool operator==(const PhotonCountModel&, const PhotonCountModel&) = default;
};

enum class Pulse : int { None = 0, Repump = 1, Depump = 2 };

const char* to_string(Pulse pulse);

/// One bin of a run.
struct TraceRecord {
  std::uint64_t bin_index = 0;
  std::int64_t photon_count = 0;
  Pulse pulse = Pulse::None;
  std::optional<HiddenState> true_state;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// log p(n | alpha). Returns -infinity for impossible counts.
double log_likelihood(const PhotonCountModel& model, std::int64_t n, HiddenState alpha);

/// p(n | alpha).
double likelihood(const PhotonCountModel& model, std::int64_t n, HiddenState alpha);

/// p(n | alpha) for all alpha, scaled so the largest entry is exactly 1.
/// The common factor cancels in every Bayes update; its log is written to
/// log_scale when given.
std::array<double, kNumStates> scaled_likelihoods(const PhotonCountModel& model, std::int64_t n,
                                                  double* log_scale = nullptr);

/// Scales a non-negative triple to unit sum. Components below 1e-300 are
/// floored to zero first. Inputs already normalized to within rounding are
/// returned unchanged, which makes normalize idempotent bit-for-bit.
/// Throws ErrorKind::AllZero when nothing is left to normalize.
BeliefVector normalize(const std::array<double, kNumStates>& v);

}  // namespace telegraph
