#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "dsm/harness.hpp"
#include "dsm/suite.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Decentralized stochastic subgradient simulator"};
  app.require_subcommand(1);

  std::string config_path;
  bool validate_only = false;
  auto* run = app.add_subcommand("run", "Run one experiment config and write its trace files");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_flag("--validate-only", validate_only, "Check the config and mixing matrix, run nothing");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a config and its mixing matrix");
  validate->add_option("config", validate_path, "Experiment config (JSON)")->required();

  std::vector<std::string> compare_paths;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string compare_out = "runs/compare";
  auto* compare = app.add_subcommand("compare", "Run several configs over a seed sweep and aggregate");
  compare->add_option("configs", compare_paths, "Experiment configs sharing problem and topology")->required();
  compare->add_option("--seeds", seeds, "Seeds to sweep")->delimiter(',');
  compare->add_option("--out", compare_out, "Output directory");

  dsm::SuiteOptions suite_options;
  std::string scratch;
  auto* suite = app.add_subcommand("suite", "Run the acceptance battery");
  suite->add_option("--filter", suite_options.filter, "Only criteria whose name or tag contains this");
  suite->add_flag("--inject-mixing-fault", suite_options.corrupt_mixing,
                  "Perturb mixing-builder output (the mixing criterion must then fail)");
  suite->add_option("--scratch", scratch, "Directory for intermediate trace files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : dsm::kExitValidation;
  }

  try {
    if (*run) return dsm::cli_run(config_path, validate_only, std::cout, std::cerr);
    if (*validate) return dsm::cli_validate(validate_path, std::cout, std::cerr);
    if (*compare) return dsm::cli_compare(compare_paths, seeds, compare_out, std::cout, std::cerr);
    if (*suite) {
      suite_options.scratch_dir = scratch;
      return dsm::cli_suite(suite_options, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dsm::kExitValidation;
  }
  return dsm::kExitValidation;
}
