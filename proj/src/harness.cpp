#include "dsm/harness.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "dsm/format.hpp"

namespace dsm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string trace_to_csv(const RunTrace& trace) {
  const bool has_lyap = std::any_of(trace.records.begin(), trace.records.end(),
                                    [](const TraceRecord& r) { return r.lyapunov.has_value(); });
  const bool has_stat = std::any_of(trace.records.begin(), trace.records.end(),
                                    [](const TraceRecord& r) { return r.stationarity.has_value(); });
  std::string out = "k,eta,lambda,f_avg,consensus_error";
  if (has_lyap) out += ",lyapunov";
  if (has_stat) out += ",stationarity";
  out += ",z_norm,zperp,zperp_next,step_norm\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : trace.records) {
    out += std::to_string(r.k);
    for (double v : {r.eta, r.lambda, r.f_avg, r.consensus_error}) out += "," + format_double(v);
    if (has_lyap) out += "," + format_double(r.lyapunov.value_or(nan));
    if (has_stat) out += "," + format_double(r.stationarity.value_or(nan));
    for (double v : {r.z_norm, r.zperp_norm, r.zperp_next, r.step_norm}) out += "," + format_double(v);
    out += '\n';
  }
  return out;
}

std::string series_to_text(const std::vector<std::pair<double, double>>& points) {
  std::string out;
  for (const auto& [x, y] : points) out += format_double(x) + " " + format_double(y) + "\n";
  return out;
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InvalidInput("write failed for '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

json run_metadata(const Experiment& experiment, const RunTrace& trace, std::uint64_t seed) {
  ExperimentConfig stored = experiment.config;
  stored.seed = seed;
  const ConsensusDecayReport decay = consensus_decay_check(trace);
  return {
      {"config", stored.to_json()},
      {"config_hash", config_hash(stored)},
      {"seed", seed},
      {"status", trace.diverged ? "diverged" : "complete"},
      {"algorithm", trace.algorithm.label()},
      {"iterations_requested", trace.iterations_requested},
      {"iterations_completed", trace.iterations_completed},
      {"diverged_at", trace.diverged_at},
      {"divergence_message", trace.divergence_message},
      {"epoch_length", experiment.epoch_length},
      {"contraction", trace.contraction},
      {"bound_checks", trace.bound_checks},
      {"bound_violations", trace.bound_violations},
      {"max_bound_excess", finite_or_null(trace.max_bound_excess)},
      {"max_average_recursion_error", trace.max_average_recursion_error},
      {"max_tracking_deviation", trace.max_tracking_deviation},
      {"max_sign_step_deviation", trace.max_sign_step_deviation},
      {"tail_mean_consensus_error", decay.tail_mean_consensus_error},
      {"warnings", trace.warnings},
      {"versions",
       {{"dsmsim", kVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"compiler", __VERSION__}}},
  };
}

bool verify_metadata(const fs::path& run_dir) {
  const json meta = json::parse(read_text(run_dir / "metadata.json"));
  const ExperimentConfig stored = ExperimentConfig::from_json(meta.at("config"));
  return config_hash(stored) == meta.at("config_hash").get<std::string>();
}

fs::path resolve_output_dir(const std::string& configured) {
  fs::path p(configured);
  if (const char* root = std::getenv(kOutputRootEnv); root && *root && p.is_relative()) return fs::path(root) / p;
  return p;
}

RunOutcome execute_and_write(const Experiment& experiment, std::uint64_t seed, const fs::path& dir) {
  RunOutcome outcome{
      run(experiment.objective, experiment.mixing, experiment.algorithm, experiment.schedule,
          experiment.initial_point(seed), seed, experiment.options),
      dir};
  const RunTrace& trace = outcome.result.trace;

  std::vector<std::pair<double, double>> loss, consensus;
  for (const auto& r : trace.records) {
    const double epoch = static_cast<double>(r.k) / experiment.epoch_length;
    loss.emplace_back(epoch, r.f_avg);
    consensus.emplace_back(epoch, r.consensus_error);
  }

  std::vector<std::pair<std::string, std::string>> files = {
      {"trace.csv", trace_to_csv(trace)},
      {"metadata.json", run_metadata(experiment, trace, seed).dump(2) + "\n"},
      {"train_loss.dat", series_to_text(loss)},
      {"consensus_error.dat", series_to_text(consensus)},
      {"mixing.csv", to_csv(experiment.mixing.matrix())},
  };
  if (experiment.mlp) files.emplace_back("dataset.csv", dataset_to_csv(make_synthetic_dataset(*experiment.mlp)));

  fs::create_directories(dir);
  for (const auto& [name, text] : files) write_text(dir / (name + ".partial"), text);
  for (const auto& [name, text] : files) fs::rename(dir / (name + ".partial"), dir / name);
  return outcome;
}

// ---------------------------------------------------------------------------

namespace {

SeedSeriesStats aggregate(const std::vector<RunTrace>& traces, double epoch_length,
                          double (*pick)(const TraceRecord&)) {
  SeedSeriesStats s;
  std::size_t n = traces.empty() ? 0 : traces.front().records.size();
  for (const auto& t : traces) n = std::min(n, t.records.size());
  for (std::size_t i = 0; i < n; ++i) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    for (const auto& t : traces) {
      const double v = pick(t.records[i]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    s.epoch.push_back(static_cast<double>(traces.front().records[i].k) / epoch_length);
    s.mean.push_back(sum / static_cast<double>(traces.size()));
    s.min.push_back(lo);
    s.max.push_back(hi);
  }
  return s;
}

std::string stats_to_text(const SeedSeriesStats& s) {
  std::string out;
  for (std::size_t i = 0; i < s.epoch.size(); ++i) {
    out += format_double(s.epoch[i]) + " " + format_double(s.mean[i]) + " " + format_double(s.min[i]) + " " +
           format_double(s.max[i]) + "\n";
  }
  return out;
}

}  // namespace

std::vector<CompareMethod> compare(const std::vector<ExperimentConfig>& configs, const std::vector<std::uint64_t>& seeds,
                                   const fs::path& out_dir, std::ostream& log) {
  if (configs.empty()) throw InvalidInput("compare needs at least one config");
  if (seeds.empty()) throw InvalidInput("compare needs at least one seed");
  for (std::size_t i = 1; i < configs.size(); ++i) {
    if (configs[i].problem != configs[0].problem) {
      throw InvalidInput("config " + std::to_string(i) + " has a different problem block than config 0");
    }
    if (configs[i].topology != configs[0].topology) {
      throw InvalidInput("config " + std::to_string(i) + " has a different topology block than config 0");
    }
  }

  std::vector<Experiment> experiments;
  for (const auto& c : configs) experiments.push_back(build_experiment(c));

  std::vector<CompareMethod> methods;
  std::map<std::string, int> label_counts;
  for (const auto& exp : experiments) {
    CompareMethod m;
    m.label = exp.algorithm.label();
    if (const int seen = label_counts[m.label]++; seen > 0) m.label += "_" + std::to_string(seen + 1);
    for (std::uint64_t seed : seeds) {
      const fs::path dir = out_dir / m.label / ("seed_" + std::to_string(seed));
      RunOutcome o = execute_and_write(exp, seed, dir);
      log << m.label << " seed " << seed << ": " << o.result.trace.iterations_completed << " iterations"
          << (o.result.trace.diverged ? " (diverged)" : "") << "\n";
      m.traces.push_back(std::move(o.result.trace));
    }
    m.loss = aggregate(m.traces, exp.epoch_length, [](const TraceRecord& r) { return r.f_avg; });
    m.consensus = aggregate(m.traces, exp.epoch_length, [](const TraceRecord& r) { return r.consensus_error; });
    m.has_stationarity = !m.traces.front().records.empty() && m.traces.front().records.front().stationarity;
    if (m.has_stationarity) {
      m.stationarity = aggregate(m.traces, exp.epoch_length,
                                 [](const TraceRecord& r) { return r.stationarity.value_or(0.0); });
    }
    methods.push_back(std::move(m));
  }

  fs::create_directories(out_dir);
  std::string summary = "method,seeds,final_loss_mean,final_loss_min,final_loss_max,final_consensus_mean,"
                        "final_consensus_max,final_stationarity_mean,final_stationarity_max\n";
  for (const auto& m : methods) {
    write_text(out_dir / (m.label + "_loss.dat"), stats_to_text(m.loss));
    write_text(out_dir / (m.label + "_consensus.dat"), stats_to_text(m.consensus));
    if (m.has_stationarity) write_text(out_dir / (m.label + "_stationarity.dat"), stats_to_text(m.stationarity));
    auto last = [](const std::vector<double>& v) {
      return v.empty() ? std::numeric_limits<double>::quiet_NaN() : v.back();
    };
    summary += m.label + "," + std::to_string(m.traces.size()) + "," + format_double(last(m.loss.mean)) + "," +
               format_double(last(m.loss.min)) + "," + format_double(last(m.loss.max)) + "," +
               format_double(last(m.consensus.mean)) + "," + format_double(last(m.consensus.max)) + "," +
               (m.has_stationarity ? format_double(last(m.stationarity.mean)) : "") + "," +
               (m.has_stationarity ? format_double(last(m.stationarity.max)) : "") + "\n";
  }
  write_text(out_dir / "summary.csv", summary);
  log << summary;
  return methods;
}

// ---------------------------------------------------------------------------

int cli_validate(const std::string& config_path, std::ostream& out, std::ostream& err) {
  try {
    const Experiment exp = build_experiment(load_config(config_path));
    const MixingReport report = validate(exp.mixing.matrix(), exp.topology);
    for (const auto& c : report.checks) {
      out << (c.passed ? "ok    " : "FAIL  ") << c.name << (c.detail.empty() ? "" : "  " + c.detail) << "\n";
    }
    out << "contraction " << format_double(report.contraction) << "\n";
    const ScheduleReport sr = exp.schedule.validate(1'000'000);
    out << "schedule " << to_string(exp.schedule.kind())
        << (sr.empirical_only ? " (empirical-only: does not diminish as o(1/log k))" : "") << "\n";
    out << "config hash " << config_hash(exp.config) << "\n";
    return report.all_passed() ? kExitSuccess : kExitValidation;
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitValidation;
  }
}

int cli_run(const std::string& config_path, bool validate_only, std::ostream& out, std::ostream& err) {
  if (validate_only) return cli_validate(config_path, out, err);
  std::optional<Experiment> built;
  try {
    built.emplace(build_experiment(load_config(config_path)));
  } catch (const Error& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitValidation;
  }
  const Experiment& exp = *built;
  const fs::path dir = resolve_output_dir(exp.config.output_dir);
  const RunOutcome o = execute_and_write(exp, exp.config.seed, dir);
  const RunTrace& t = o.result.trace;
  out << "wrote " << dir.string() << " (" << t.iterations_completed << " iterations, "
      << exp.algorithm.label() << ")\n";
  if (!t.records.empty()) {
    out << "final f(xbar) " << format_double(t.records.back().f_avg) << ", consensus error "
        << format_double(t.records.back().consensus_error) << "\n";
  }
  if (t.diverged) {
    err << "diverged: " << t.divergence_message << "\n";
    return kExitDivergence;
  }
  return kExitSuccess;
}

int cli_compare(const std::vector<std::string>& config_paths, const std::vector<std::uint64_t>& seeds,
                const std::string& out_dir, std::ostream& out, std::ostream& err) {
  std::vector<ExperimentConfig> configs;
  try {
    for (const auto& p : config_paths) configs.push_back(load_config(p));
    const auto methods = compare(configs, seeds, resolve_output_dir(out_dir), out);
    for (const auto& m : methods)
      for (const auto& t : m.traces)
        if (t.diverged) return kExitDivergence;
    return kExitSuccess;
  } catch (const Error& e) {
    err << "compare failed: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace dsm
