#pragma once

// Experiment configuration: a flat "key = value" text format with dotted
// or bracketed sections, SI units spelled out in the key names.
//
//   # comment
//   [rates]
//   r21_per_s = 35
//   sim.bin_time_s = 0.001      # dotted keys work anywhere
//   photon.mean_counts_per_bin = 40, 28, 16
//
// Every key is optional; missing keys keep their defaults. Unknown keys and
// malformed values are rejected with the offending line number.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "telegraph/bayes_filter.hpp"
#include "telegraph/feedback_controller.hpp"
#include "telegraph/rate_grid_estimator.hpp"
#include "telegraph/telegraph_simulator.hpp"

namespace telegraph {

struct SweepSpec {
  double repump_min_per_s = 0.0;
  double repump_max_per_s = 150.0;
  std::size_t points = 151;
  double duration_s = 0.3;

  std::vector<double> values() const;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct EstimationSpec {
  double stop_threshold = 0.10;
  std::size_t check_every = 10;
  std::size_t snapshot_every = 100;
  Propagation propagation = Propagation::Exact;

  friend bool operator==(const EstimationSpec&, const EstimationSpec&) = default;
};

struct TuningSpec {
  bool enabled = false;       // sweep fixed pulse strengths before the run
  std::size_t n_traces = 20;

  friend bool operator==(const TuningSpec&, const TuningSpec&) = default;
};

struct ExperimentConfig {
  SimConfig sim;
  FilterConfig filter;
  std::optional<GridSpec> grid;
  EstimationSpec estimation;
  std::optional<ControlPolicy> policy;
  TuningSpec tuning;
  SweepSpec sweep;
  std::size_t n_traces = 1;
  std::string output_dir = "out";
  bool allow_model_mismatch = false;

  /// Default configuration: weak-repumping open-loop run at the measured
  /// rates with the stand-in photon model (40, 28, 16 counts per 1 ms bin).
  static ExperimentConfig defaults();

  /// Sim/filter consistency checks. Throws Error(Config).
  void validate() const;

  /// Changes the bin time of sim and filter, keeping count rates constant.
  void set_bin_time(double bin_time);

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct ConfigEntry {
  std::string value;
  int line = 0;
};

/// Splits config text into fully qualified keys. Throws Error(Config).
std::map<std::string, ConfigEntry> parse_config_entries(const std::string& text);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a 64 over the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace telegraph
