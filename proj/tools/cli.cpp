#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "telegraph/analytics.hpp"
#include "telegraph/bayes_filter.hpp"
#include "telegraph/closed_loop.hpp"
#include "telegraph/ensemble.hpp"
#include "telegraph/error.hpp"
#include "telegraph/experiment.hpp"
#include "telegraph/rate_grid_estimator.hpp"
#include "telegraph/telegraph_simulator.hpp"
#include "telegraph/trace_io.hpp"

#ifndef TELEGRAPH_VERSION
#define TELEGRAPH_VERSION "unknown"
#endif

namespace telegraph::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> traces;
  std::optional<std::string> out_dir;
  std::optional<double> bin_time_ms;
  std::optional<std::string> policy;
  std::vector<std::string> inputs;
};

// Raised for config problems found while applying command-line overrides.
struct ConfigProblem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExperimentConfig effective_config(const Options& o) {
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig::defaults()
                                             : load_config(o.config_path);
  if (o.seed) c.sim.rng_seed = *o.seed;
  if (o.traces) c.n_traces = *o.traces;
  if (o.out_dir) c.output_dir = *o.out_dir;
  if (o.bin_time_ms) c.set_bin_time(*o.bin_time_ms * 1e-3);
  if (o.policy) {
    if (!c.policy) c.policy = ControlPolicy{};
    c.policy->mode = *o.policy == "optimal" ? PolicyMode::OptimalT : PolicyMode::SimpleThreshold;
  }
  c.validate();
  return c;
}

class Output {
 public:
  explicit Output(const ExperimentConfig& c) : root_(c.output_dir) {
    fs::create_directories(root_);
  }

  fs::path path(const std::string& rel) {
    const fs::path p = root_ / rel;
    fs::create_directories(p.parent_path());
    files_.push_back(rel);
    return p;
  }

  std::ofstream open(const std::string& rel) {
    std::ofstream f(path(rel), std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot write " + (root_ / rel).string());
    return f;
  }

  void write_json(const std::string& rel, const json& j) {
    auto f = open(rel);
    f << j.dump(2) << '\n';
  }

  // Manifest plus the effective config; rerunning with that config and
  // seed reproduces every listed file.
  void finish(const std::string& command, const ExperimentConfig& c) {
    {
      auto f = open("config.cfg");
      f << serialize_config(c);
    }
    json m;
    m["command"] = command;
    m["seed"] = c.sim.rng_seed;
    m["config_hash"] = config_hash(c);
    m["config_file"] = "config.cfg";
    m["n_traces"] = c.n_traces;
    m["versions"] = {
        {"telegraph", TELEGRAPH_VERSION},
        {"cli11", CLI11_VERSION},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
#if defined(__clang__)
        {"compiler", "clang " __clang_version__},
#elif defined(__GNUC__)
        {"compiler", "gcc " __VERSION__},
#else
        {"compiler", "unknown"},
#endif
    };
    m["outputs"] = files_;
    std::ofstream f(root_ / "manifest.json", std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot write manifest");
    f << m.dump(2) << '\n';
  }

 private:
  fs::path root_;
  std::vector<std::string> files_;
};

std::string numbered(const char* dir, const char* stem, std::size_t i) {
  std::ostringstream s;
  s << dir << '/' << stem << '_' << std::setw(4) << std::setfill('0') << i << ".csv";
  return s.str();
}

json belief_json(const BeliefVector& b) { return json::array({b[0], b[1], b[2]}); }

json rates_json(const std::array<RatePosterior, 3>& r) {
  json j;
  const char* names[] = {"r21", "r10", "repump"};
  for (int a = 0; a < 3; ++a) j[names[a]] = {{"mean_per_s", r[a].mean}, {"rms_per_s", r[a].rms}};
  return j;
}

// Occupancy, dwell and recovery of the target state; dwell and recovery are
// null when the ensemble never produces them.
json belief_summary(const std::vector<std::vector<BeliefVector>>& beliefs, double bin_time,
                    HiddenState target) {
  json j;
  const auto occ = mean_occupancy(beliefs);
  j["mean_belief"] = belief_json(occ.mean_p);
  j["n_bins"] = occ.n_bins;
  try {
    const auto d = dwell_time(beliefs, target, bin_time);
    j["dwell"] = {{"tau_s", d.tau},
                  {"standard_error_s", d.standard_error},
                  {"episodes", d.n_episodes},
                  {"truncated", d.n_truncated}};
  } catch (const Error&) {
    j["dwell"] = nullptr;
  }
  try {
    const auto r = time_to_target(beliefs, bin_time, target);
    j["time_to_target"] = {
        {"mean_s", r.mean}, {"episodes", r.n_episodes}, {"censored", r.n_censored}};
  } catch (const Error&) {
    j["time_to_target"] = nullptr;
  }
  return j;
}

HiddenState target_state(const ExperimentConfig& c) {
  return c.policy ? HiddenState(c.policy->target.argmax()) : HiddenState::one();
}

int cmd_simulate(const ExperimentConfig& c, std::ostream& out) {
  Output o(c);
  const auto traces = run_ensemble(c.n_traces, c.sim.rng_seed, [&](std::size_t, std::uint64_t s) {
    SimConfig sim = c.sim;
    sim.rng_seed = s;
    return run_trace(sim);
  });
  std::vector<TraceRecord> all;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    auto f = o.open(numbered("traces", "trace", i));
    write_trace(f, traces[i]);
    all.insert(all.end(), traces[i].begin(), traces[i].end());
  }
  {
    auto f = o.open("histogram.csv");
    write_histogram(f, all);
  }
  o.finish("simulate", c);
  out << "wrote " << traces.size() << " trace(s) of " << c.sim.n_bins << " bins to "
      << c.output_dir << '\n';
  return kOk;
}

int cmd_estimate(const ExperimentConfig& c, const std::vector<std::string>& inputs,
                 std::ostream& out, std::ostream& err) {
  if (!c.grid) throw ConfigProblem("estimate-rates needs a rate grid (grid.enabled = true)");
  Output o(c);
  EstimationOptions opts;
  opts.stop_threshold = c.estimation.stop_threshold;
  opts.check_every = c.estimation.check_every;
  opts.snapshot_every = c.estimation.snapshot_every;
  opts.propagation = c.estimation.propagation;
  opts.initial_states = c.filter.initial_belief;

  json report = json::array();
  bool all_converged = true;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto recs = load_trace(inputs[i]);
    const auto est =
        estimate_rates(recs, *c.grid, c.filter.photon_model, c.filter.bin_time, opts);
    const auto snap = numbered("snapshots", "posterior", i);
    {
      auto f = o.open(snap);
      write_snapshots(f, *c.grid, est.snapshots);
    }
    json j;
    j["input"] = inputs[i];
    j["bins"] = recs.size();
    j["converged"] = est.converged;
    j["stop_time_s"] = est.stop_time ? json(*est.stop_time) : json(nullptr);
    j["rates"] = rates_json(est.rates);
    j["final_rates"] = rates_json(est.final_rates);
    j["final_states"] = belief_json(est.final_states);
    j["snapshots"] = snap;
    report.push_back(j);

    out << inputs[i] << ':';
    const char* names[] = {"R21", "R10", "Rr"};
    for (int a = 0; a < 3; ++a) {
      out << ' ' << names[a] << " = " << est.rates[a].mean << " +- " << est.rates[a].rms;
    }
    if (est.converged) {
      out << " (stopped at " << *est.stop_time << " s)\n";
    } else {
      out << '\n';
      err << "warning: " << inputs[i] << " did not reach rms/mean <= "
          << c.estimation.stop_threshold << "; final rms";
      for (int a = 0; a < 3; ++a) err << ' ' << names[a] << '=' << est.final_rates[a].rms;
      err << '\n';
      all_converged = false;
    }
  }
  o.write_json("rates.json", report);
  o.finish("estimate-rates", c);
  return all_converged ? kOk : kNotConverged;
}

int cmd_feedback(const ExperimentConfig& c, std::ostream& out) {
  if (!c.policy) {
    throw ConfigProblem("feedback needs a policy (policy.enabled = true or --policy)");
  }
  Output o(c);
  ControlPolicy policy = *c.policy;
  json summary;
  if (c.tuning.enabled) {
    const auto tuned = tune_fixed_pulse(c.sim, c.filter, policy, c.tuning.n_traces,
                                        derive_seed(c.sim.rng_seed, 0x7475));
    policy.fixed_t_repump = policy.fixed_t_depump = tuned.t;
    summary["tuning"] = {{"t", tuned.t}, {"candidates", tuned.candidates},
                         {"scores", tuned.scores}};
  }
  const auto runs = run_ensemble(c.n_traces, c.sim.rng_seed, [&](std::size_t, std::uint64_t s) {
    SimConfig sim = c.sim;
    sim.rng_seed = s;
    return run_closed_loop(sim, c.filter, policy);
  });

  std::vector<std::vector<BeliefVector>> beliefs;
  std::size_t repumps = 0, depumps = 0, bins = 0;
  std::array<double, 3> hidden{};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    {
      auto f = o.open(numbered("traces", "trace", i));
      write_trace(f, runs[i].records);
    }
    {
      auto f = o.open(numbered("beliefs", "beliefs", i));
      write_beliefs(f, runs[i].posteriors);
    }
    for (const auto& r : runs[i].records) {
      repumps += r.pulse == Pulse::Repump;
      depumps += r.pulse == Pulse::Depump;
      hidden[static_cast<std::size_t>(r.true_state->value())] += 1.0;
      ++bins;
    }
    beliefs.push_back(runs[i].posteriors);
  }
  for (auto& h : hidden) h /= static_cast<double>(bins);

  const HiddenState target = target_state(c);
  summary["policy"] = policy.mode == PolicyMode::OptimalT ? "optimal" : "simple";
  summary["t_repump"] = policy.fixed_t_repump;
  summary["t_depump"] = policy.fixed_t_depump;
  summary["target_state"] = target.value();
  summary["belief"] = belief_summary(beliefs, c.sim.bin_time, target);
  summary["hidden_occupancy"] = json::array({hidden[0], hidden[1], hidden[2]});
  summary["pulses"] = {{"repump", repumps}, {"depump", depumps}};
  o.write_json("summary.json", summary);
  o.finish("feedback", c);

  const auto& mean = summary["belief"]["mean_belief"];
  out << "mean belief (" << mean[0].get<double>() << ", " << mean[1].get<double>() << ", "
      << mean[2].get<double>() << ") over " << runs.size() << " trace(s)\n";
  return kOk;
}

int cmd_sweep(const ExperimentConfig& c, std::ostream& out) {
  Output o(c);
  const auto values = c.sweep.values();
  const auto curve = sweep_repump_rate(c.sim.rates, values, c.sweep.duration_s, c.sim.bin_time);
  {
    auto f = o.open("sweep.csv");
    write_sweep(f, curve);
  }
  json s;
  s["best_finite"] = {{"repump_per_s", curve.best_finite.r_repump},
                      {"mean_p1", curve.best_finite.mean_p1}};
  s["best_stationary"] = {{"repump_per_s", curve.best_stationary_r},
                          {"p1", curve.best_stationary_p1}};
  s["duration_s"] = c.sweep.duration_s;
  o.write_json("summary.json", s);
  o.finish("sweep", c);
  out << "max mean p1 " << curve.best_finite.mean_p1 << " at Rr = " << curve.best_finite.r_repump
      << " /s; stationary optimum " << curve.best_stationary_p1 << " at "
      << curve.best_stationary_r << " /s\n";
  return kOk;
}

int cmd_analyze(const ExperimentConfig& c, const std::vector<std::string>& inputs,
                std::ostream& out) {
  Output o(c);
  std::vector<std::vector<BeliefVector>> beliefs;
  std::vector<TraceRecord> all;
  std::size_t truth_bins = 0, correct = 0;
  double log_lik = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto recs = load_trace(inputs[i]);
    if (recs.empty()) throw Error(ErrorKind::Empty, inputs[i] + " has no records");
    auto b = run_filter(recs, c.filter);
    {
      auto f = o.open(numbered("beliefs", "beliefs", i));
      write_beliefs(f, b);
    }
    for (std::size_t k = 0; k < recs.size(); ++k) {
      if (!recs[k].true_state) continue;
      ++truth_bins;
      correct += b[k].argmax() == recs[k].true_state->value();
    }
    log_lik += mean_log_likelihood(recs, c.filter) * static_cast<double>(recs.size());
    all.insert(all.end(), recs.begin(), recs.end());
    beliefs.push_back(std::move(b));
  }
  {
    auto f = o.open("histogram.csv");
    write_histogram(f, all);
  }
  const HiddenState target = target_state(c);
  json s = belief_summary(beliefs, c.filter.bin_time, target);
  s["target_state"] = target.value();
  s["inputs"] = inputs;
  s["mean_log_likelihood"] = log_lik / static_cast<double>(all.size());
  s["argmax_accuracy"] = truth_bins ? json(static_cast<double>(correct) / truth_bins)
                                    : json(nullptr);
  o.write_json("summary.json", s);
  o.finish("analyze", c);
  const auto& mean = s["mean_belief"];
  out << "mean belief (" << mean[0].get<double>() << ", " << mean[1].get<double>() << ", "
      << mean[2].get<double>() << ") over " << inputs.size() << " trace(s)\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Telegraph process simulation, filtering and feedback"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "Config file (key = value)");
  app.add_option("--seed", o.seed, "Base RNG seed");
  app.add_option("--traces", o.traces, "Number of traces")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out_dir, "Output directory");
  app.add_option("--bin-time-ms", o.bin_time_ms, "Bin time in milliseconds");
  app.add_option("--policy", o.policy, "Feedback policy")
      ->check(CLI::IsMember({"simple", "optimal"}));

  auto* simulate = app.add_subcommand("simulate", "Simulate open-loop traces");
  auto* estimate = app.add_subcommand("estimate-rates", "Infer rates from trace files");
  auto* feedback = app.add_subcommand("feedback", "Run closed-loop feedback");
  auto* sweep = app.add_subcommand("sweep", "Mean p1 versus repump rate");
  auto* analyze = app.add_subcommand("analyze", "Filter trace files and summarize");
  estimate->add_option("traces", o.inputs, "Trace CSV files")->required();
  analyze->add_option("traces", o.inputs, "Trace CSV files")->required();
  for (auto* sub : {simulate, estimate, feedback, sweep, analyze}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kConfigError;
  }

  ExperimentConfig config;
  try {
    config = effective_config(o);
  } catch (const std::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(config, out);
    if (estimate->parsed()) return cmd_estimate(config, o.inputs, out, err);
    if (feedback->parsed()) return cmd_feedback(config, out);
    if (sweep->parsed()) return cmd_sweep(config, out);
    return cmd_analyze(config, o.inputs, out);
  } catch (const ConfigProblem& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return e.kind() == ErrorKind::Config ? kConfigError : kRuntimeError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace telegraph::cli
