#include "telegraph/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "telegraph/error.hpp"

namespace telegraph {

namespace {

[[noreturn]] void io_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::Io, "line " + std::to_string(line) + ": " + what);
}

template <typename Int>
Int parse_field(std::string_view field, std::size_t line, const char* name) {
  Int value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    io_fail(line, std::string("bad ") + name + " '" + std::string(field) + "'");
  }
  return value;
}

std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_trace(std::ostream& out, std::span<const TraceRecord> records, bool include_truth) {
  out << kTraceHeader << '\n';
  for (const auto& r : records) {
    const int truth = include_truth && r.true_state ? r.true_state->value() : -1;
    out << r.bin_index << ',' << r.photon_count << ',' << static_cast<int>(r.pulse) << ','
        << truth << '\n';
  }
}

std::vector<TraceRecord> read_trace(std::istream& in) {
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) return out;
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) io_fail(lineno, "expected header '" + std::string(kTraceHeader) + "'");
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<std::string_view, 4> fields;
    std::string_view rest(line);
    for (std::size_t i = 0; i < 4; ++i) {
      const auto comma = rest.find(',');
      if ((comma == std::string_view::npos) != (i == 3)) io_fail(lineno, "expected 4 fields");
      fields[i] = rest.substr(0, comma);
      if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
    }
    TraceRecord rec;
    rec.bin_index = parse_field<std::uint64_t>(fields[0], lineno, "bin_index");
    rec.photon_count = parse_field<std::int64_t>(fields[1], lineno, "photon_count");
    if (rec.photon_count < 0) io_fail(lineno, "negative photon count");
    const int pulse = parse_field<int>(fields[2], lineno, "pulse");
    if (pulse < 0 || pulse > 2) io_fail(lineno, "pulse must be 0, 1 or 2");
    rec.pulse = static_cast<Pulse>(pulse);
    const int truth = parse_field<int>(fields[3], lineno, "true_state");
    if (truth < -1 || truth > 2) io_fail(lineno, "true_state must be -1, 0, 1 or 2");
    if (truth >= 0) rec.true_state = HiddenState(truth);
    if (!out.empty() && rec.bin_index <= out.back().bin_index) {
      io_fail(lineno, "bin_index must be strictly increasing");
    }
    out.push_back(rec);
  }
  return out;
}

void save_trace(const std::string& path, std::span<const TraceRecord> records,
                bool include_truth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  write_trace(out, records, include_truth);
  if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

std::vector<TraceRecord> load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  try {
    return read_trace(in);
  } catch (const Error& e) {
    throw Error(ErrorKind::Io, path + ": " + e.what());
  }
}

void write_beliefs(std::ostream& out, std::span<const BeliefVector> beliefs) {
  out << "bin_index,p0,p1,p2\n";
  for (std::size_t i = 0; i < beliefs.size(); ++i) {
    out << i << ',' << fmt(beliefs[i][0]) << ',' << fmt(beliefs[i][1]) << ','
        << fmt(beliefs[i][2]) << '\n';
  }
}

void write_snapshots(std::ostream& out, const GridSpec& spec,
                     std::span<const GridSnapshot> snapshots) {
  static constexpr const char* kNames[3] = {"r21", "r10", "repump"};
  out << "time_s,rate,value_per_s,probability\n";
  for (const auto& snap : snapshots) {
    for (int a = 0; a < 3; ++a) {
      const auto& axis = spec.axis(static_cast<RateAxis>(a));
      for (std::size_t i = 0; i < snap.marginals[a].size(); ++i) {
        out << fmt(snap.time) << ',' << kNames[a] << ',' << fmt(axis.value(i)) << ','
            << fmt(snap.marginals[a][i]) << '\n';
      }
    }
  }
}

void write_sweep(std::ostream& out, const SweepCurve& curve) {
  out << "repump_per_s,mean_p1,stationary_p1\n";
  for (const auto& p : curve.points) {
    out << fmt(p.r_repump) << ',' << fmt(p.mean_p1) << ',' << fmt(p.stationary_p1) << '\n';
  }
}

void write_histogram(std::ostream& out, std::span<const TraceRecord> records) {
  std::map<std::int64_t, std::size_t> counts;
  for (const auto& r : records) ++counts[r.photon_count];
  out << "photon_count,bins\n";
  if (counts.empty()) return;
  for (std::int64_t n = 0; n <= counts.rbegin()->first; ++n) {
    const auto it = counts.find(n);
    out << n << ',' << (it == counts.end() ? 0 : it->second) << '\n';
  }
}

}  // namespace telegraph
