#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dsm/config.hpp"

namespace dsm {

struct CriterionResult {
  int id = 0;
  std::string name;
  std::vector<std::string> tags;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct SuiteOptions {
  /// Substring matched against criterion names and tags; empty runs all.
  std::string filter;
  /// Fault injection: perturbs builder output inside the mixing criterion.
  bool corrupt_mixing = false;
  /// Scratch space for trace files; a fresh temp dir when empty.
  std::filesystem::path scratch_dir;
};

/// The acceptance battery. Prints one PASS/FAIL line per selected criterion
/// to `log` and returns the results in criterion order.
std::vector<CriterionResult> run_acceptance_suite(const SuiteOptions& options, std::ostream& log);

/// Median corpus a = (0, 1, 2, 3) on ring(4) with Metropolis weights,
/// polynomial steps eta0 = 0.2, p = 0.6. label: dsgd, dsgdm, dsignsgd, dsgd_t.
ExperimentConfig median_benchmark_config(const std::string& label, std::int64_t iterations = 100'000,
                                         std::uint64_t seed = 1);

/// 8 -> 16 -> 1 ReLU regression on 512 samples over ring(4), staircase steps
/// decaying by 0.2 at epochs 60/120/160 of 200.
ExperimentConfig mlp_benchmark_config(const std::string& label, std::uint64_t seed = 1);

/// Returns kExitSuccess or kExitAcceptance.
int cli_suite(const SuiteOptions& options, std::ostream& out);

}  // namespace dsm
