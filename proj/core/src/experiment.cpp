#include "telegraph/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "telegraph/error.hpp"

namespace telegraph {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void fail(int line, const std::string& what) {
  std::ostringstream msg;
  if (line > 0) msg << "line " << line << ": ";
  msg << what;
  throw Error(ErrorKind::Config, msg.str());
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const ConfigEntry& e) {
  double x = 0.0;
  const char* begin = e.value.data();
  const char* end = begin + e.value.size();
  const auto res = std::from_chars(begin, end, x);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(x)) {
    fail(e.line, key + ": expected a number, got '" + e.value + "'");
  }
  return x;
}

std::uint64_t parse_uint(const std::string& key, const ConfigEntry& e) {
  std::uint64_t x = 0;
  const char* begin = e.value.data();
  const char* end = begin + e.value.size();
  const auto res = std::from_chars(begin, end, x);
  if (res.ec != std::errc() || res.ptr != end) {
    fail(e.line, key + ": expected a non-negative integer, got '" + e.value + "'");
  }
  return x;
}

bool parse_bool(const std::string& key, const ConfigEntry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  fail(e.line, key + ": expected true or false, got '" + e.value + "'");
}

std::array<double, 3> parse_triple(const std::string& key, const ConfigEntry& e) {
  std::array<double, 3> out{};
  std::stringstream ss(e.value);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= 3) fail(e.line, key + ": expected three comma-separated numbers");
    out[i++] = parse_double(key, ConfigEntry{trim(item), e.line});
  }
  if (i != 3) fail(e.line, key + ": expected three comma-separated numbers");
  return out;
}

std::string format_triple(const std::array<double, 3>& v) {
  return format_double(v[0]) + ", " + format_double(v[1]) + ", " + format_double(v[2]);
}

// One handler per key; the serializer walks the same table so both stay in
// sync.
struct KeyHandler {
  std::string key;
  std::function<void(ExperimentConfig&, const ConfigEntry&)> read;
  std::function<std::string(const ExperimentConfig&)> write;  // empty -> not serialized
};

GridSpec& grid_of(ExperimentConfig& c) {
  if (!c.grid) c.grid = GridSpec{};
  return *c.grid;
}

ControlPolicy& policy_of(ExperimentConfig& c) {
  if (!c.policy) c.policy = ControlPolicy{};
  return *c.policy;
}

void add_axis(std::vector<KeyHandler>& keys, const std::string& name, AxisSpec GridSpec::*axis) {
  keys.push_back({"grid." + name + "_min_per_s",
                  [=](ExperimentConfig& c, const ConfigEntry& e) {
                    (grid_of(c).*axis).min = parse_double("grid." + name + "_min_per_s", e);
                  },
                  [=](const ExperimentConfig& c) { return format_double(((*c.grid).*axis).min); }});
  keys.push_back({"grid." + name + "_max_per_s",
                  [=](ExperimentConfig& c, const ConfigEntry& e) {
                    (grid_of(c).*axis).max = parse_double("grid." + name + "_max_per_s", e);
                  },
                  [=](const ExperimentConfig& c) { return format_double(((*c.grid).*axis).max); }});
  keys.push_back({"grid." + name + "_points",
                  [=](ExperimentConfig& c, const ConfigEntry& e) {
                    (grid_of(c).*axis).n_points = parse_uint("grid." + name + "_points", e);
                  },
                  [=](const ExperimentConfig& c) {
                    return std::to_string(((*c.grid).*axis).n_points);
                  }});
}

void add_propagation(std::vector<KeyHandler>& keys, const std::string& key,
                     Propagation& (*field)(ExperimentConfig&)) {
  keys.push_back({key,
                  [=](ExperimentConfig& c, const ConfigEntry& e) {
                    if (e.value == "linearized") {
                      field(c) = Propagation::Linearized;
                    } else if (e.value == "exact") {
                      field(c) = Propagation::Exact;
                    } else {
                      fail(e.line, key + ": expected linearized or exact");
                    }
                  },
                  [=](const ExperimentConfig& c) {
                    const auto p = field(const_cast<ExperimentConfig&>(c));
                    return std::string(p == Propagation::Exact ? "exact" : "linearized");
                  }});
}

const std::vector<KeyHandler>& key_table() {
  static const std::vector<KeyHandler> table = [] {
    std::vector<KeyHandler> k;
    auto num = [&k](const std::string& key, auto getter) {
      k.push_back({key,
                   [=](ExperimentConfig& c, const ConfigEntry& e) { getter(c) = parse_double(key, e); },
                   [=](const ExperimentConfig& c) {
                     return format_double(getter(const_cast<ExperimentConfig&>(c)));
                   }});
    };
    auto uint = [&k](const std::string& key, auto getter) {
      k.push_back({key,
                   [=](ExperimentConfig& c, const ConfigEntry& e) {
                     getter(c) = static_cast<std::remove_reference_t<decltype(getter(c))>>(
                         parse_uint(key, e));
                   },
                   [=](const ExperimentConfig& c) {
                     return std::to_string(getter(const_cast<ExperimentConfig&>(c)));
                   }});
    };
    auto flag = [&k](const std::string& key, auto getter) {
      k.push_back({key,
                   [=](ExperimentConfig& c, const ConfigEntry& e) { getter(c) = parse_bool(key, e); },
                   [=](const ExperimentConfig& c) {
                     return std::string(getter(const_cast<ExperimentConfig&>(c)) ? "true" : "false");
                   }});
    };

    // experiment
    uint("experiment.seed", [](ExperimentConfig& c) -> std::uint64_t& { return c.sim.rng_seed; });
    uint("experiment.n_traces", [](ExperimentConfig& c) -> std::size_t& { return c.n_traces; });
    k.push_back({"experiment.output_dir",
                 [](ExperimentConfig& c, const ConfigEntry& e) { c.output_dir = e.value; },
                 [](const ExperimentConfig& c) { return c.output_dir; }});
    flag("experiment.allow_model_mismatch",
         [](ExperimentConfig& c) -> bool& { return c.allow_model_mismatch; });

    // sim
    k.push_back({"sim.bin_time_s",
                 [](ExperimentConfig& c, const ConfigEntry& e) {
                   const double v = parse_double("sim.bin_time_s", e);
                   if (!(v > 0.0)) fail(e.line, "sim.bin_time_s: must be > 0");
                   c.set_bin_time(v);
                 },
                 [](const ExperimentConfig& c) { return format_double(c.sim.bin_time); }});
    k.push_back({"sim.bin_time_ms",
                 [](ExperimentConfig& c, const ConfigEntry& e) {
                   const double v = parse_double("sim.bin_time_ms", e) * 1e-3;
                   if (!(v > 0.0)) fail(e.line, "sim.bin_time_ms: must be > 0");
                   c.set_bin_time(v);
                 },
                 {}});
    uint("sim.n_bins", [](ExperimentConfig& c) -> std::uint64_t& { return c.sim.n_bins; });
    k.push_back({"sim.initial_state",
                 [](ExperimentConfig& c, const ConfigEntry& e) {
                   const auto v = parse_uint("sim.initial_state", e);
                   if (v > 2) fail(e.line, "sim.initial_state: must be 0, 1 or 2");
                   c.sim.initial_state = HiddenState(static_cast<int>(v));
                 },
                 [](const ExperimentConfig& c) { return std::to_string(c.sim.initial_state.value()); }});

    // rates (simulator)
    num("rates.r21_per_s", [](ExperimentConfig& c) -> double& { return c.sim.rates.r21; });
    num("rates.r10_per_s", [](ExperimentConfig& c) -> double& { return c.sim.rates.r10; });
    num("rates.repump_per_s", [](ExperimentConfig& c) -> double& { return c.sim.rates.r_repump; });
    num("rates.depump_per_s", [](ExperimentConfig& c) -> double& { return c.sim.rates.r_depump; });

    // photon model (simulator)
    k.push_back({"photon.mean_counts_per_bin",
                 [](ExperimentConfig& c, const ConfigEntry& e) {
                   c.sim.photon_model.mean_counts = parse_triple("photon.mean_counts_per_bin", e);
                 },
                 [](const ExperimentConfig& c) { return format_triple(c.sim.photon_model.mean_counts); }});
    k.push_back({"photon.family",
                 [](ExperimentConfig& c, const ConfigEntry& e) {
                   if (e.value == "poisson") {
                     c.sim.photon_model.family = CountFamily::Poisson;
                   } else if (e.value == "overdispersed") {
                     c.sim.photon_model.family = CountFamily::OverDispersed;
                   } else {
                     fail(e.line, "photon.family: expected poisson or overdispersed");
                   }
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(c.sim.photon_model.family == CountFamily::Poisson
                                          ? "poisson"
                                          : "overdispersed");
                 }});
    num("photon.fano", [](ExperimentConfig& c) -> double& { return c.sim.photon_model.fano; });

    // filter
    num("filter.r21_per_s", [](ExperimentConfig& c) -> double& { return c.filter.rates.r21; });
    num("filter.r10_per_s", [](ExperimentConfig& c) -> double& { return c.filter.rates.r10; });
    num("filter.repump_per_s",
        [](ExperimentConfig& c) -> double& { return c.filter.rates.r_repump; });
    k.push_back({"filter.mean_counts_per_bin",
                 [](ExperimentConfig& c, const ConfigEntry& e) {
                   c.filter.photon_model.mean_counts =
                       parse_triple("filter.mean_counts_per_bin", e);
                 },
                 [](const ExperimentConfig& c) {
                   return format_triple(c.filter.photon_model.mean_counts);
                 }});
    k.push_back({"filter.family",
                 [](ExperimentConfig& c, const ConfigEntry& e) {
                   if (e.value == "poisson") {
                     c.filter.photon_model.family = CountFamily::Poisson;
                   } else if (e.value == "overdispersed") {
                     c.filter.photon_model.family = CountFamily::OverDispersed;
                   } else {
                     fail(e.line, "filter.family: expected poisson or overdispersed");
                   }
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(c.filter.photon_model.family == CountFamily::Poisson
                                          ? "poisson"
                                          : "overdispersed");
                 }});
    num("filter.fano", [](ExperimentConfig& c) -> double& { return c.filter.photon_model.fano; });
    k.push_back({"filter.initial_belief",
                 [](ExperimentConfig& c, const ConfigEntry& e) {
                   const auto v = parse_triple("filter.initial_belief", e);
                   try {
                     c.filter.initial_belief = normalize(v);
                   } catch (const Error&) {
                     fail(e.line, "filter.initial_belief: needs a positive entry");
                   }
                 },
                 [](const ExperimentConfig& c) { return format_triple(c.filter.initial_belief.p); }});
    add_propagation(k, "filter.propagation",
                    [](ExperimentConfig& c) -> Propagation& { return c.filter.propagation; });
    num("filter.t_repump", [](ExperimentConfig& c) -> double& { return c.filter.pulses.t_repump; });
    num("filter.t_depump", [](ExperimentConfig& c) -> double& { return c.filter.pulses.t_depump; });

    // grid
    k.push_back({"grid.enabled",
                 [](ExperimentConfig& c, const ConfigEntry& e) {
                   if (parse_bool("grid.enabled", e)) {
                     grid_of(c);
                   } else {
                     c.grid.reset();
                   }
                 },
                 [](const ExperimentConfig& c) { return std::string(c.grid ? "true" : "false"); }});
    add_axis(k, "r21", &GridSpec::r21);
    add_axis(k, "r10", &GridSpec::r10);
    add_axis(k, "repump", &GridSpec::r_repump);
    k.push_back({"grid.max_cells",
                 [](ExperimentConfig& c, const ConfigEntry& e) {
                   grid_of(c).max_cells = parse_uint("grid.max_cells", e);
                 },
                 [](const ExperimentConfig& c) { return std::to_string(c.grid->max_cells); }});
    num("estimation.stop_threshold",
        [](ExperimentConfig& c) -> double& { return c.estimation.stop_threshold; });
    uint("estimation.check_every",
         [](ExperimentConfig& c) -> std::size_t& { return c.estimation.check_every; });
    uint("estimation.snapshot_every",
         [](ExperimentConfig& c) -> std::size_t& { return c.estimation.snapshot_every; });
    add_propagation(k, "estimation.propagation",
                    [](ExperimentConfig& c) -> Propagation& { return c.estimation.propagation; });

    // policy
    k.push_back({"policy.enabled",
                 [](ExperimentConfig& c, const ConfigEntry& e) {
                   if (parse_bool("policy.enabled", e)) {
                     policy_of(c);
                   } else {
                     c.policy.reset();
                   }
                 },
                 [](const ExperimentConfig& c) { return std::string(c.policy ? "true" : "false"); }});
    k.push_back({"policy.mode",
                 [](ExperimentConfig& c, const ConfigEntry& e) {
                   if (e.value == "simple") {
                     policy_of(c).mode = PolicyMode::SimpleThreshold;
                   } else if (e.value == "optimal") {
                     policy_of(c).mode = PolicyMode::OptimalT;
                   } else {
                     fail(e.line, "policy.mode: expected simple or optimal");
                   }
                 },
                 [](const ExperimentConfig& c) {
                   return std::string(c.policy->mode == PolicyMode::OptimalT ? "optimal" : "simple");
                 }});
    k.push_back({"policy.t_repump",
                 [](ExperimentConfig& c, const ConfigEntry& e) {
                   policy_of(c).fixed_t_repump = parse_double("policy.t_repump", e);
                 },
                 [](const ExperimentConfig& c) { return format_double(c.policy->fixed_t_repump); }});
    k.push_back({"policy.t_depump",
                 [](ExperimentConfig& c, const ConfigEntry& e) {
                   policy_of(c).fixed_t_depump = parse_double("policy.t_depump", e);
                 },
                 [](const ExperimentConfig& c) { return format_double(c.policy->fixed_t_depump); }});
    k.push_back({"policy.target",
                 [](ExperimentConfig& c, const ConfigEntry& e) {
                   const auto v = parse_triple("policy.target", e);
                   try {
                     policy_of(c).target = normalize(v);
                   } catch (const Error&) {
                     fail(e.line, "policy.target: needs a positive entry");
                   }
                 },
                 [](const ExperimentConfig& c) { return format_triple(c.policy->target.p); }});
    flag("policy.tune", [](ExperimentConfig& c) -> bool& { return c.tuning.enabled; });
    uint("policy.tune_traces", [](ExperimentConfig& c) -> std::size_t& { return c.tuning.n_traces; });

    // sweep
    num("sweep.repump_min_per_s",
        [](ExperimentConfig& c) -> double& { return c.sweep.repump_min_per_s; });
    num("sweep.repump_max_per_s",
        [](ExperimentConfig& c) -> double& { return c.sweep.repump_max_per_s; });
    uint("sweep.points", [](ExperimentConfig& c) -> std::size_t& { return c.sweep.points; });
    num("sweep.duration_s", [](ExperimentConfig& c) -> double& { return c.sweep.duration_s; });
    return k;
  }();
  return table;
}

}  // namespace

std::vector<double> SweepSpec::values() const {
  std::vector<double> v;
  if (points == 0) return v;
  if (points == 1) return {repump_min_per_s};
  for (std::size_t i = 0; i < points; ++i) {
    v.push_back(repump_min_per_s + (repump_max_per_s - repump_min_per_s) *
                                       static_cast<double>(i) / static_cast<double>(points - 1));
  }
  return v;
}

ExperimentConfig ExperimentConfig::defaults() {
  ExperimentConfig c;
  c.sim.rates = {35.0, 50.0, 59.0, 0.0};
  c.sim.photon_model = PhotonCountModel{};
  c.sim.bin_time = 1e-3;
  c.sim.n_bins = 5100;
  c.sim.initial_state = HiddenState::two();
  c.sim.rng_seed = 1;
  c.filter.photon_model = c.sim.photon_model;
  c.filter.rates = c.sim.rates;
  c.filter.bin_time = c.sim.bin_time;
  c.grid = GridSpec{};
  return c;
}

void ExperimentConfig::set_bin_time(double bin_time) {
  if (!(bin_time > 0.0) || !std::isfinite(bin_time)) {
    throw Error(ErrorKind::Config, "bin time must be > 0");
  }
  sim.photon_model = sim.photon_model.rescaled(bin_time);
  filter.photon_model = filter.photon_model.rescaled(bin_time);
  sim.bin_time = bin_time;
  filter.bin_time = bin_time;
}

void ExperimentConfig::validate() const {
  auto wrap = [](const char* what, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, std::string(what) + ": " + e.what());
    }
  };
  wrap("sim", [&] { sim.validate(); });
  wrap("filter", [&] { filter.validate(); });
  if (grid) wrap("grid", [&] { grid->validate(); });
  if (policy) wrap("policy", [&] { policy->validate(); });
  if (n_traces == 0) throw Error(ErrorKind::Config, "experiment.n_traces must be >= 1");
  if (sim.bin_time != filter.bin_time) {
    throw Error(ErrorKind::Config, "simulator and filter bin times differ");
  }
  if (!allow_model_mismatch && !(sim.photon_model == filter.photon_model)) {
    throw Error(ErrorKind::Config,
                "filter photon model differs from the simulator's; set "
                "experiment.allow_model_mismatch = true to allow it");
  }
  if (!(estimation.stop_threshold > 0.0)) {
    throw Error(ErrorKind::Config, "estimation.stop_threshold must be > 0");
  }
  if (!(sweep.duration_s > 0.0) || sweep.points == 0) {
    throw Error(ErrorKind::Config, "sweep needs a positive duration and at least one point");
  }
}

std::map<std::string, ConfigEntry> parse_config_entries(const std::string& text) {
  std::map<std::string, ConfigEntry> out;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      if (section.empty()) fail(line, "empty section name");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    if (key.empty()) fail(line, "missing key");
    if (key.find('.') == std::string::npos) {
      if (section.empty()) fail(line, "key '" + key + "' needs a section");
      key = section + "." + key;
    }
    if (out.contains(key)) {
      fail(line, "duplicate key '" + key + "' (first set on line " +
                     std::to_string(out[key].line) + ")");
    }
    out[key] = ConfigEntry{value, line};
  }
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  const auto entries = parse_config_entries(text);
  ExperimentConfig c = ExperimentConfig::defaults();
  const auto& table = key_table();
  for (const auto& [key, entry] : entries) {
    const bool known = std::any_of(table.begin(), table.end(),
                                   [&](const KeyHandler& h) { return h.key == key; });
    if (!known) fail(entry.line, "unknown key '" + key + "'");
  }
  // Filter settings default to the simulator's unless given explicitly, so
  // read simulator keys first and copy them over.
  auto apply = [&](auto&& pred) {
    for (const auto& h : table) {
      if (!pred(h.key)) continue;
      if (const auto it = entries.find(h.key); it != entries.end()) {
        try {
          h.read(c, it->second);
        } catch (const Error& e) {
          if (e.kind() == ErrorKind::Config) throw;
          fail(it->second.line, h.key + ": " + e.what());
        }
      }
    }
  };
  auto is_filter = [](const std::string& key) { return key.rfind("filter.", 0) == 0; };
  apply([&](const std::string& key) { return !is_filter(key); });
  c.filter.rates = c.sim.rates;
  c.filter.rates.r_depump = 0.0;
  c.filter.photon_model = c.sim.photon_model;
  c.filter.bin_time = c.sim.bin_time;
  c.filter.initial_belief = BeliefVector::delta(c.sim.initial_state);
  if (c.policy) {
    c.filter.pulses = {c.policy->fixed_t_repump, c.policy->fixed_t_depump};
  }
  apply(is_filter);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, path + ": " + e.what());
  }
}

std::string serialize_config(const ExperimentConfig& config) {
  std::ostringstream out;
  std::string section;
  for (const auto& h : key_table()) {
    if (!h.write) continue;
    const auto dot = h.key.find('.');
    const std::string sec = h.key.substr(0, dot);
    const std::string name = h.key.substr(dot + 1);
    const bool grid_detail = sec == "grid" && name != "enabled";
    const bool policy_detail = sec == "policy" && name != "enabled" && name != "tune" &&
                               name != "tune_traces";
    if ((grid_detail && !config.grid) || (policy_detail && !config.policy)) continue;
    if (sec != section) {
      if (!section.empty()) out << '\n';
      out << '[' << sec << "]\n";
      section = sec;
    }
    out << name << " = " << h.write(config) << '\n';
  }
  return out.str();
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace telegraph
