#include "dsm/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "dsm/format.hpp"

namespace dsm {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& field) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(field + "." + key, "missing");
  return obj.at(key);
}

template <typename T>
T get_as(const json& v, const std::string& field) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(field, "has the wrong type (" + std::string(v.type_name()) + ")");
  }
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback, const std::string& field) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return get_as<T>(obj.at(key), field + "." + key);
}

// Runs fn, re-raising library errors as ConfigError for `field`.
template <typename Fn>
auto attributed(const std::string& field, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(field, e.what());
  } catch (const json::exception& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  static const char* known[] = {"problem",         "topology",         "mixing",         "algorithm",
                                "schedule",        "noise",            "iterations",     "seed",
                                "record_stride",   "output_dir",       "divergence_bound", "history_capacity",
                                "record_agent_values", "surrogate_stationarity"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw ConfigError(item.key(), "unknown field");
  }
  ExperimentConfig c;
  c.problem = require(j, "problem", "config");
  c.topology = require(j, "topology", "config");
  c.mixing = j.value("mixing", json{{"kind", "metropolis"}});
  c.algorithm = require(j, "algorithm", "config");
  c.schedule = require(j, "schedule", "config");
  c.noise = j.contains("noise") ? j.at("noise") : json();
  c.iterations = get_as<std::int64_t>(require(j, "iterations", "config"), "iterations");
  c.seed = get_as<std::uint64_t>(require(j, "seed", "config"), "seed");
  c.record_stride = field_or<std::int64_t>(j, "record_stride", 10, "config");
  c.output_dir = field_or<std::string>(j, "output_dir", "runs", "config");
  c.divergence_bound = field_or<double>(j, "divergence_bound", 1e8, "config");
  c.history_capacity = field_or<std::int64_t>(j, "history_capacity", 0, "config");
  c.record_agent_values = field_or<bool>(j, "record_agent_values", false, "config");
  c.surrogate_stationarity = field_or<bool>(j, "surrogate_stationarity", false, "config");
  for (const char* block : {"problem", "topology", "mixing", "algorithm", "schedule"}) {
    if (!j.value(block, json::object()).is_object()) throw ConfigError(block, "must be an object");
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json j = {{"problem", problem},
            {"topology", topology},
            {"mixing", mixing},
            {"algorithm", algorithm},
            {"schedule", schedule},
            {"iterations", iterations},
            {"seed", seed},
            {"record_stride", record_stride},
            {"output_dir", output_dir},
            {"divergence_bound", divergence_bound},
            {"history_capacity", history_capacity},
            {"record_agent_values", record_agent_values},
            {"surrogate_stationarity", surrogate_stationarity}};
  if (!noise.is_null()) j["noise"] = noise;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("parse error: ") + e.what());
  }
  return ExperimentConfig::from_json(j);
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << config.to_json().dump(2) << '\n';
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = config.to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<double>> parse_anchors(const json& spec, int d) {
  const json& anchors = require(spec, "anchors", "problem");
  if (!anchors.is_array() || static_cast<int>(anchors.size()) != d) {
    throw ConfigError("problem.anchors", "needs one entry per agent (" + std::to_string(d) + ")");
  }
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const std::string field = "problem.anchors[" + std::to_string(i) + "]";
    if (anchors[i].is_array()) {
      auto v = get_as<std::vector<double>>(anchors[i], field);
      if (v.empty()) throw ConfigError(field, "must not be empty");
      out.push_back(std::move(v));
    } else {
      out.push_back({get_as<double>(anchors[i], field)});
    }
  }
  return out;
}

std::vector<std::vector<Eigen::VectorXd>> parse_centers(const json& spec, int d) {
  std::vector<std::vector<Eigen::VectorXd>> centers;
  if (spec.contains("centers")) {
    const json& all = spec.at("centers");
    if (!all.is_array() || static_cast<int>(all.size()) != d) {
      throw ConfigError("problem.centers", "needs one list of centers per agent (" + std::to_string(d) + ")");
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
      std::vector<Eigen::VectorXd> mine;
      for (std::size_t j = 0; j < all[i].size(); ++j) {
        const auto v = get_as<std::vector<double>>(all[i][j], "problem.centers[" + std::to_string(i) + "]");
        mine.push_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
      }
      centers.push_back(std::move(mine));
    }
    return centers;
  }
  const int n = field_or<int>(spec, "dimension", 5, "problem");
  const int m = field_or<int>(spec, "components", 4, "problem");
  const double scale = field_or<double>(spec, "center_scale", 2.0, "problem");
  const auto seed = field_or<std::uint64_t>(spec, "data_seed", 11, "problem");
  if (n < 1) throw ConfigError("problem.dimension", "must be positive");
  if (m < 1) throw ConfigError("problem.components", "must be positive");
  CounterRng rng(seed, kDataStream);
  for (int i = 0; i < d; ++i) {
    std::vector<Eigen::VectorXd> mine;
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd c(n);
      for (int t = 0; t < n; ++t) c(t) = scale * rng.normal();
      mine.push_back(std::move(c));
    }
    centers.push_back(std::move(mine));
  }
  return centers;
}

MlpProblemSpec parse_mlp(const json& spec) {
  MlpProblemSpec m;
  m.shape.input = field_or<int>(spec, "input", 8, "problem");
  m.shape.hidden = field_or<int>(spec, "hidden", 16, "problem");
  m.samples = field_or<int>(spec, "samples", 512, "problem");
  m.batch_size = field_or<int>(spec, "batch_size", 16, "problem");
  m.teacher_hidden = field_or<int>(spec, "teacher_hidden", 4, "problem");
  m.label_noise = field_or<double>(spec, "label_noise", 0.05, "problem");
  m.data_seed = field_or<std::uint64_t>(spec, "data_seed", 7, "problem");
  const auto loss = field_or<std::string>(spec, "loss", "mse", "problem");
  if (loss == "mse") {
    m.loss = MlpLoss::SquaredError;
  } else if (loss == "logistic") {
    m.loss = MlpLoss::Logistic;
  } else {
    throw ConfigError("problem.loss", "must be mse or logistic");
  }
  if (m.shape.input < 1) throw ConfigError("problem.input", "must be positive");
  if (m.shape.hidden < 1) throw ConfigError("problem.hidden", "must be positive");
  if (m.batch_size < 1) throw ConfigError("problem.batch_size", "must be positive");
  if (m.label_noise < 0.0) throw ConfigError("problem.label_noise", "must be nonnegative");
  return m;
}

NoiseConfig parse_noise(const json& spec) {
  NoiseConfig n;
  if (spec.is_null()) return n;
  const auto kind = field_or<std::string>(spec, "kind", "none", "noise");
  if (kind == "none") return n;
  if (kind == "uniform") {
    n.kind = NoiseConfig::Kind::Uniform;
  } else if (kind == "gaussian") {
    n.kind = NoiseConfig::Kind::Gaussian;
  } else {
    throw ConfigError("noise.kind", "must be none, uniform or gaussian");
  }
  n.scale = get_as<double>(require(spec, "scale", "noise"), "noise.scale");
  if (!(n.scale >= 0.0) || !std::isfinite(n.scale)) throw ConfigError("noise.scale", "must be finite and >= 0");
  return n;
}

AlgorithmConfig parse_algorithm(const json& spec, double eta0, RunOptions& options) {
  AlgorithmConfig a;
  const auto name = get_as<std::string>(require(spec, "variant", "algorithm"), "algorithm.variant");
  a.variant = attributed("algorithm.variant", [&] { return variant_from_string(name); });
  if (name == "dsgdm") a.phi = Phi::HalfSqNorm;
  if (name == "dsignsgd") a.phi = Phi::L1Norm;
  if (spec.contains("phi")) {
    const auto phi = get_as<std::string>(spec.at("phi"), "algorithm.phi");
    a.phi = attributed("algorithm.phi", [&] { return phi_from_string(phi); });
    if ((name == "dsgdm" && a.phi != Phi::HalfSqNorm) || (name == "dsignsgd" && a.phi != Phi::L1Norm)) {
      throw ConfigError("algorithm.phi", "contradicts variant '" + name + "'");
    }
  }
  if (a.variant == Variant::DGSGDm) {
    if (spec.contains("tau") && spec.contains("tau_eta0")) {
      throw ConfigError("algorithm.tau", "give either tau or tau_eta0, not both");
    }
    if (spec.contains("tau")) {
      a.tau = get_as<double>(spec.at("tau"), "algorithm.tau");
    } else {
      // tau = c / eta0; default c = 0.1.
      a.tau = field_or<double>(spec, "tau_eta0", 0.1, "algorithm") / eta0;
    }
    attributed("algorithm.tau", [&] { a.validate(eta0); });
    const auto init = field_or<std::string>(spec, "momentum_init", "mixed", "algorithm");
    if (init == "mixed") {
      options.momentum_init = RunOptions::MomentumInit::Mixed;
    } else if (init == "zero") {
      options.momentum_init = RunOptions::MomentumInit::Zero;
    } else if (init == "subgradient") {
      options.momentum_init = RunOptions::MomentumInit::Subgradient;
    } else {
      throw ConfigError("algorithm.momentum_init", "must be mixed, zero or subgradient");
    }
  }
  return a;
}

}  // namespace

Eigen::MatrixXd Experiment::initial_point(std::uint64_t seed) const {
  const int d = topology.num_agents();
  const int n = objective->dimension();
  const json init = config.problem.value("init", json::object());
  const auto mode = init.value("mode", std::string(mlp ? "he" : "common"));
  CounterRng rng(seed, kInitStream);
  Eigen::MatrixXd x0(n, d);
  if (mode == "point") {
    const auto v = init.at("x0").get<std::vector<double>>();
    for (int i = 0; i < d; ++i) x0.col(i) = Eigen::Map<const Eigen::VectorXd>(v.data(), n);
  } else if (mode == "he") {
    const Eigen::VectorXd p = init_mlp_params(mlp->shape, rng);
    x0.colwise() = p;
  } else {
    const double lo = init.value("low", -5.0);
    const double hi = init.value("high", 10.0);
    if (mode == "common") {
      Eigen::VectorXd p(n);
      for (int c = 0; c < n; ++c) p(c) = rng.uniform(lo, hi);
      x0.colwise() = p;
    } else {
      for (int i = 0; i < d; ++i)
        for (int c = 0; c < n; ++c) x0(c, i) = rng.uniform(lo, hi);
    }
  }
  return x0;
}

Experiment build_experiment(const ExperimentConfig& config) {
  if (config.iterations < 0) throw ConfigError("iterations", "must be nonnegative");
  if (config.record_stride < 1) throw ConfigError("record_stride", "must be positive");
  if (!(config.divergence_bound > 0.0)) throw ConfigError("divergence_bound", "must be positive");
  if (config.history_capacity < 0) throw ConfigError("history_capacity", "must be nonnegative");

  Topology topology = attributed("topology", [&] { return topology_from_json(config.topology); });
  if (!is_connected(topology)) throw ConfigError("topology", "graph is not connected");
  const int d = topology.num_agents();

  const auto kind = get_as<std::string>(require(config.problem, "kind", "problem"), "problem.kind");
  std::shared_ptr<GlobalObjective> objective;
  std::optional<MlpProblemSpec> mlp;
  if (kind == "median") {
    const auto anchors = parse_anchors(config.problem, d);
    objective = attributed("problem", [&] { return make_median_problem(anchors); });
  } else if (kind == "l1_quadratic") {
    const auto centers = parse_centers(config.problem, d);
    const double lambda = field_or<double>(config.problem, "lambda", 0.5, "problem");
    if (!(lambda >= 0.0)) throw ConfigError("problem.lambda", "must be nonnegative");
    objective = attributed("problem", [&] { return make_l1_quadratic_problem(centers, lambda); });
  } else if (kind == "relu_mlp") {
    mlp = parse_mlp(config.problem);
    objective = attributed("problem", [&] { return make_relu_mlp_problem(*mlp, d); });
  } else {
    throw ConfigError("problem.kind", "must be median, l1_quadratic or relu_mlp");
  }

  if (config.problem.contains("init")) {
    const json& init = config.problem.at("init");
    const auto mode = field_or<std::string>(init, "mode", "common", "problem.init");
    if (mode != "common" && mode != "per_agent" && mode != "point" && mode != "he") {
      throw ConfigError("problem.init.mode", "must be common, per_agent, point or he");
    }
    if (mode == "he" && !mlp) throw ConfigError("problem.init.mode", "he initialisation needs relu_mlp");
    if (mode == "point") {
      const auto v = get_as<std::vector<double>>(require(init, "x0", "problem.init"), "problem.init.x0");
      if (static_cast<int>(v.size()) != objective->dimension()) {
        throw ConfigError("problem.init.x0", "needs " + std::to_string(objective->dimension()) + " entries");
      }
    }
    if (field_or<double>(init, "low", -5.0, "problem.init") > field_or<double>(init, "high", 10.0, "problem.init")) {
      throw ConfigError("problem.init", "low must not exceed high");
    }
  }
  const double epoch_length =
      config.problem.contains("epoch_length")
          ? get_as<double>(config.problem.at("epoch_length"), "problem.epoch_length")
          : objective->iterations_per_epoch();
  if (!(epoch_length > 0.0)) throw ConfigError("problem.epoch_length", "must be positive");

  const auto mix_kind = field_or<std::string>(config.mixing, "kind", "metropolis", "mixing");
  MixingMatrix mixing = attributed("mixing", [&] {
    if (mix_kind == "metropolis") return metropolis(topology);
    if (mix_kind == "laplacian") {
      return laplacian_weights(topology, get_as<double>(require(config.mixing, "epsilon", "mixing"), "mixing.epsilon"));
    }
    if (mix_kind == "explicit") {
      const auto rows = get_as<std::vector<std::vector<double>>>(require(config.mixing, "matrix", "mixing"),
                                                                  "mixing.matrix");
      Eigen::MatrixXd w(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : rows.front().size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != static_cast<std::size_t>(w.cols())) throw ConfigError("mixing.matrix", "ragged rows");
        for (std::size_t j = 0; j < rows[i].size(); ++j) w(i, j) = rows[i][j];
      }
      return MixingMatrix::from_matrix(std::move(w), topology);
    }
    throw ConfigError("mixing.kind", "must be metropolis, laplacian or explicit");
  });

  StepSchedule schedule = attributed("schedule", [&] { return schedule_from_json(config.schedule, epoch_length); });

  RunOptions options;
  AlgorithmConfig algorithm = parse_algorithm(config.algorithm, schedule.eta0(), options);
  options.iterations = config.iterations;
  options.record_stride = config.record_stride;
  options.divergence_bound = config.divergence_bound;
  options.history_capacity = static_cast<std::size_t>(config.history_capacity);
  options.record_agent_values = config.record_agent_values;
  options.surrogate_stationarity = config.surrogate_stationarity;
  options.noise = parse_noise(config.noise);

  return Experiment{config,    std::move(objective), std::move(mlp), std::move(topology), std::move(mixing),
                    algorithm, std::move(schedule),  options,        epoch_length};
}

}  // namespace dsm
