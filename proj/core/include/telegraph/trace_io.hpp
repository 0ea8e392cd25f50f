#pragma once

// Text formats for traces and derived curves. All files are UTF-8 CSV with
// a header line and '\n' line endings.
//
// Trace file:
//   bin_index,photon_count,pulse,true_state
//   0,17,0,2
//   1,15,2,-1
// pulse: 0 = none, 1 = repump, 2 = depump; true_state -1 = withheld.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "telegraph/analytics.hpp"
#include "telegraph/rate_grid_estimator.hpp"
#include "telegraph/state_model.hpp"

namespace telegraph {

inline constexpr const char* kTraceHeader = "bin_index,photon_count,pulse,true_state";

void write_trace(std::ostream& out, std::span<const TraceRecord> records,
                 bool include_truth = true);

/// Throws Error(Io) with the line number on malformed input, including
/// non-increasing bin indices.
std::vector<TraceRecord> read_trace(std::istream& in);

void save_trace(const std::string& path, std::span<const TraceRecord> records,
                bool include_truth = true);
std::vector<TraceRecord> load_trace(const std::string& path);

/// bin_index,p0,p1,p2
void write_beliefs(std::ostream& out, std::span<const BeliefVector> beliefs);

/// time_s,rate,value_per_s,probability  (rate is r21, r10 or repump)
void write_snapshots(std::ostream& out, const GridSpec& spec,
                     std::span<const GridSnapshot> snapshots);

/// repump_per_s,mean_p1,stationary_p1
void write_sweep(std::ostream& out, const SweepCurve& curve);

/// photon_count,bins
void write_histogram(std::ostream& out, std::span<const TraceRecord> records);

}  // namespace telegraph
