#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsm/config.hpp"
#include "dsm/diagnostics.hpp"
#include "dsm/engine.hpp"

namespace dsm {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputRootEnv = "DSM_OUTPUT_ROOT";

enum ExitCode : int { kExitSuccess = 0, kExitValidation = 1, kExitDivergence = 2, kExitAcceptance = 3 };

/// Columns: k, eta, lambda, f_avg, consensus_error, [lyapunov], [stationarity],
/// z_norm, zperp, zperp_next, step_norm. Optional columns appear only when
/// the run produced them.
std::string trace_to_csv(const RunTrace& trace);

/// Two whitespace-separated numeric columns per line.
std::string series_to_text(const std::vector<std::pair<double, double>>& points);

nlohmann::json run_metadata(const Experiment& experiment, const RunTrace& trace, std::uint64_t seed);

/// True when metadata.json's config_hash matches a re-hash of its stored config.
bool verify_metadata(const std::filesystem::path& run_dir);

/// The configured directory, re-rooted under $DSM_OUTPUT_ROOT when set and
/// the configured path is relative.
std::filesystem::path resolve_output_dir(const std::string& configured);

struct RunOutcome {
  RunResult result;
  std::filesystem::path dir;
};

/// Runs the experiment with the given seed and writes trace.csv,
/// metadata.json, train_loss.dat, consensus_error.dat, mixing.csv (and
/// dataset.csv for relu_mlp) into dir. Files are staged as *.partial and
/// renamed only after all of them are written.
RunOutcome execute_and_write(const Experiment& experiment, std::uint64_t seed, const std::filesystem::path& dir);

struct SeedSeriesStats {
  std::vector<double> epoch, mean, min, max;
};

struct CompareMethod {
  std::string label;
  std::vector<RunTrace> traces;  // one per seed
  SeedSeriesStats loss, consensus, stationarity;
  bool has_stationarity = false;
};

/// Runs each config over the seed list (methods under one seed share the
/// initial point) and writes <label>_<metric>.dat series with columns
/// epoch, mean, min, max plus summary.csv into out_dir. Throws InvalidInput
/// when the configs disagree on problem or topology.
std::vector<CompareMethod> compare(const std::vector<ExperimentConfig>& configs, const std::vector<std::uint64_t>& seeds,
                                   const std::filesystem::path& out_dir, std::ostream& log);

// CLI verbs; return an ExitCode.
int cli_run(const std::string& config_path, bool validate_only, std::ostream& out, std::ostream& err);
int cli_validate(const std::string& config_path, std::ostream& out, std::ostream& err);
int cli_compare(const std::vector<std::string>& config_paths, const std::vector<std::uint64_t>& seeds,
                const std::string& out_dir, std::ostream& out, std::ostream& err);

}  // namespace dsm
