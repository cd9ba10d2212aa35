#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "dsm/algorithm.hpp"
#include "dsm/engine.hpp"
#include "dsm/error.hpp"
#include "dsm/graph.hpp"
#include "dsm/mixing.hpp"
#include "dsm/mlp.hpp"
#include "dsm/oracle.hpp"
#include "dsm/schedule.hpp"

namespace dsm {

/// Validation failure attributed to a config field, e.g. "schedule.p".
class ConfigError : public InvalidInput {
 public:
  ConfigError(std::string field, const std::string& message)
      : InvalidInput(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// One experiment, stored as its JSON blocks so it round-trips exactly.
///
///   {
///     "problem":   {"kind": "median"|"l1_quadratic"|"relu_mlp", ..., "init": {...}},
///     "topology":  {"kind": "ring"|"complete"|"random"|"edges", "d", ...},
///     "mixing":    {"kind": "metropolis"|"laplacian"|"explicit", "epsilon"?, "matrix"?},
///     "algorithm": {"variant": "dsgd"|"dsgdm"|"dsignsgd"|"dgsgdm"|"dsgd_t",
///                   "phi"?, "tau"?, "tau_eta0"?, "momentum_init"?},
///     "schedule":  {"schedule": ..., "eta0", ...},
///     "noise":     {"kind": "none"|"uniform"|"gaussian", "scale"}?,
///     "iterations", "seed", "record_stride"?, "output_dir"?,
///     "divergence_bound"?, "history_capacity"?, "record_agent_values"?,
///     "surrogate_stationarity"?
///   }
struct ExperimentConfig {
  nlohmann::json problem;
  nlohmann::json topology;
  nlohmann::json mixing;
  nlohmann::json algorithm;
  nlohmann::json schedule;
  nlohmann::json noise;  // null when absent
  std::int64_t iterations = 0;
  std::uint64_t seed = 0;
  std::int64_t record_stride = 10;
  std::string output_dir = "runs";
  double divergence_bound = 1e8;
  std::int64_t history_capacity = 0;
  bool record_agent_values = false;
  bool surrogate_stationarity = false;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.to_json() == b.to_json();
  }
};

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);

/// FNV-1a 64 of the canonical (sorted-key, compact) JSON dump, as hex.
std::string config_hash(const ExperimentConfig& config);

/// Everything a run needs, validated.
struct Experiment {
  ExperimentConfig config;
  std::shared_ptr<GlobalObjective> objective;
  std::optional<MlpProblemSpec> mlp;  // set for relu_mlp problems
  Topology topology;
  MixingMatrix mixing;
  AlgorithmConfig algorithm;
  StepSchedule schedule;
  RunOptions options;
  double epoch_length = 1.0;

  /// Initial local variables for the given seed. Depends only on the problem
  /// block and the seed, so methods compared under one seed share it.
  Eigen::MatrixXd initial_point(std::uint64_t seed) const;
};

/// Builds and validates every block; throws ConfigError naming the field.
Experiment build_experiment(const ExperimentConfig& config);

}  // namespace dsm
