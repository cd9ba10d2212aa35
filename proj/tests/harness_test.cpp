#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dsm/config.hpp"
#include "dsm/harness.hpp"

#ifndef DSM_CONFIG_DIR
#error "DSM_CONFIG_DIR must point at the shipped example configs"
#endif

namespace dsm {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("dsm_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json small_median(const std::string& variant, std::int64_t iterations = 2000) {
  json alg = {{"variant", variant}};
  if (variant == "dsgdm" || variant == "dsignsgd") alg["tau_eta0"] = 0.1;
  return {{"problem", {{"kind", "median"}, {"anchors", {0, 1, 2, 3}}}},
          {"topology", {{"kind", "ring"}, {"d", 4}}},
          {"mixing", {{"kind", "metropolis"}}},
          {"algorithm", alg},
          {"schedule", {{"schedule", "polynomial"}, {"eta0", 0.2}, {"p", 0.6}}},
          {"iterations", iterations},
          {"seed", 1}};
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

TEST(Config, RoundTripsThroughFile) {
  TempDir tmp;
  const ExperimentConfig cfg = load_config(std::string(DSM_CONFIG_DIR) + "/mlp_ring8_dsgdm.json");
  save_config(cfg, (tmp.path() / "copy.json").string());
  const ExperimentConfig back = load_config((tmp.path() / "copy.json").string());
  EXPECT_EQ(back, cfg);
  EXPECT_EQ(config_hash(back), config_hash(cfg));
}

TEST(Config, UnknownKeysAndBadValuesNameTheField) {
  json j = small_median("dsgd");
  j["iteratoins"] = 5;
  EXPECT_THROW(ExperimentConfig::from_json(j), ConfigError);

  json bad = small_median("dsgd");
  bad["schedule"]["p"] = 2.0;
  try {
    build_experiment(ExperimentConfig::from_json(bad));
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(e.field().find("schedule"), std::string::npos);
  }
}

TEST(Config, DisconnectedTopologyIsRejected) {
  json j = small_median("dsgd");
  j["topology"] = {{"kind", "edges"}, {"d", 4}, {"edges", {{0, 1}, {2, 3}}}};
  EXPECT_THROW(build_experiment(ExperimentConfig::from_json(j)), ConfigError);
}

TEST(Config, MomentumDefaultsToTenthOverEtaZero) {
  const Experiment exp = build_experiment(ExperimentConfig::from_json(small_median("dsgdm")));
  EXPECT_DOUBLE_EQ(exp.algorithm.tau, 0.1 / 0.2);
}

TEST(Config, RingOfEightMlpMomentumConfigBuilds) {
  const Experiment exp = build_experiment(load_config(std::string(DSM_CONFIG_DIR) + "/mlp_ring8_dsgdm.json"));
  EXPECT_EQ(exp.topology.num_agents(), 8);
  EXPECT_EQ(exp.algorithm.label(), "dsgdm");
  EXPECT_DOUBLE_EQ(exp.epoch_length, 4.0);
  EXPECT_EQ(exp.schedule.boundaries(), (std::vector<std::int64_t>{240, 480, 640}));
}

TEST(CliRun, MlpConfigWritesSeriesFiles) {
  TempDir tmp;
  json j = load_config(std::string(DSM_CONFIG_DIR) + "/mlp_ring8_dsgdm.json").to_json();
  j["output_dir"] = (tmp.path() / "out").string();
  std::ostringstream out, err;
  ASSERT_EQ(cli_run(write_config(tmp.path(), "c.json", j).string(), false, out, err), kExitSuccess) << err.str();
  for (const char* f : {"trace.csv", "metadata.json", "train_loss.dat", "consensus_error.dat", "mixing.csv", "dataset.csv"})
    EXPECT_TRUE(fs::exists(tmp.path() / "out" / f)) << f;
  EXPECT_TRUE(verify_metadata(tmp.path() / "out"));
  const std::string loss = slurp(tmp.path() / "out" / "train_loss.dat");
  EXPECT_FALSE(loss.empty());
}

TEST(CliRun, ValidateOnlyRunsNothing) {
  TempDir tmp;
  json j = small_median("dsgd");
  j["output_dir"] = (tmp.path() / "out").string();
  const fs::path cfg = write_config(tmp.path(), "c.json", j);
  std::ostringstream out, err;
  EXPECT_EQ(cli_run(cfg.string(), true, out, err), kExitSuccess);
  EXPECT_FALSE(fs::exists(tmp.path() / "out"));
  EXPECT_NE(out.str().find("contraction"), std::string::npos);
}

TEST(CliRun, ExplicitBadMatrixFailsValidation) {
  TempDir tmp;
  json j = small_median("dsgd");
  j["mixing"] = {{"kind", "explicit"}, {"matrix", {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}}};
  std::ostringstream out, err;
  EXPECT_EQ(cli_run(write_config(tmp.path(), "c.json", j).string(), true, out, err), kExitValidation);
}

TEST(CliRun, SameConfigTwiceGivesIdenticalTraces) {
  TempDir tmp;
  std::ostringstream out, err;
  for (const char* leaf : {"a", "b"}) {
    json j = small_median("dsignsgd");
    j["output_dir"] = (tmp.path() / leaf).string();
    ASSERT_EQ(cli_run(write_config(tmp.path(), std::string(leaf) + ".json", j).string(), false, out, err), kExitSuccess);
  }
  EXPECT_EQ(slurp(tmp.path() / "a" / "trace.csv"), slurp(tmp.path() / "b" / "trace.csv"));
}

TEST(CliRun, DivergenceReturnsExitTwo) {
  TempDir tmp;
  json j = small_median("dsgd");
  j["divergence_bound"] = 1.0;
  j["output_dir"] = (tmp.path() / "out").string();
  std::ostringstream out, err;
  EXPECT_EQ(cli_run(write_config(tmp.path(), "c.json", j).string(), false, out, err), kExitDivergence);
}

TEST(CliRun, MissingFileIsValidationFailure) {
  std::ostringstream out, err;
  EXPECT_EQ(cli_run("/nonexistent/config.json", false, out, err), kExitValidation);
}

TEST(Metadata, TamperedConfigIsDetected) {
  TempDir tmp;
  const Experiment exp = build_experiment(ExperimentConfig::from_json(small_median("dsgd", 200)));
  execute_and_write(exp, 1, tmp.path());
  ASSERT_TRUE(verify_metadata(tmp.path()));
  json meta = json::parse(slurp(tmp.path() / "metadata.json"));
  meta["config"]["iterations"] = 201;
  std::ofstream(tmp.path() / "metadata.json") << meta.dump(2);
  EXPECT_FALSE(verify_metadata(tmp.path()));
}

TEST(Output, NoPartialFilesRemainAfterSuccess) {
  TempDir tmp;
  const Experiment exp = build_experiment(ExperimentConfig::from_json(small_median("dsgd_t", 200)));
  execute_and_write(exp, 1, tmp.path());
  for (const auto& e : fs::directory_iterator(tmp.path())) EXPECT_NE(e.path().extension(), ".partial");
}

TEST(Output, EnvironmentRootPrefixesRelativeDirs) {
  ::setenv(kOutputRootEnv, "/tmp/dsm_root", 1);
  EXPECT_EQ(resolve_output_dir("runs/x"), fs::path("/tmp/dsm_root/runs/x"));
  EXPECT_EQ(resolve_output_dir("/abs/x"), fs::path("/abs/x"));
  ::unsetenv(kOutputRootEnv);
  EXPECT_EQ(resolve_output_dir("runs/x"), fs::path("runs/x"));
}

TEST(TraceCsv, FixedColumnOrder) {
  const Experiment exp = build_experiment(ExperimentConfig::from_json(small_median("dsgdm", 50)));
  const RunResult r = run(exp.objective, exp.mixing, exp.algorithm, exp.schedule, exp.initial_point(1), 1, exp.options);
  const std::string csv = trace_to_csv(r.trace);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "k,eta,lambda,f_avg,consensus_error,lyapunov,stationarity,z_norm,zperp,zperp_next,step_norm");
}

TEST(Compare, TrackingAndPlainBothReachStationarity) {
  TempDir tmp;
  json a = small_median("dsgd", 100000);
  json b = small_median("dsgd_t", 100000);
  a["record_stride"] = b["record_stride"] = 1000;
  std::ostringstream log;
  const auto methods = compare({ExperimentConfig::from_json(a), ExperimentConfig::from_json(b)}, {1, 2, 3, 4, 5},
                               tmp.path(), log);
  ASSERT_EQ(methods.size(), 2u);
  for (const auto& m : methods) {
    ASSERT_TRUE(m.has_stationarity);
    EXPECT_EQ(m.traces.size(), 5u);
    EXPECT_LT(m.stationarity.max.back(), 1e-2) << m.label;
  }
  EXPECT_TRUE(fs::exists(tmp.path() / "summary.csv"));
}

TEST(Compare, ThreeMomentumVariantsGiveThreeFilesPerMetric) {
  TempDir tmp;
  std::vector<ExperimentConfig> configs;
  for (const char* v : {"dsgd", "dsgdm", "dsignsgd"}) configs.push_back(ExperimentConfig::from_json(small_median(v)));
  std::ostringstream log;
  compare(configs, {1, 2, 3, 4, 5}, tmp.path(), log);
  for (const char* metric : {"loss", "consensus", "stationarity"}) {
    int files = 0;
    for (const auto& e : fs::directory_iterator(tmp.path()))
      if (e.path().filename().string().ends_with(std::string("_") + metric + ".dat")) ++files;
    EXPECT_EQ(files, 3) << metric;
  }
}

TEST(Compare, SingleConfigIsASeedSweep) {
  TempDir tmp;
  std::ostringstream log;
  const auto methods = compare({ExperimentConfig::from_json(small_median("dsgd", 300))}, {4, 5}, tmp.path(), log);
  ASSERT_EQ(methods.size(), 1u);
  EXPECT_TRUE(fs::exists(tmp.path() / "dsgd" / "seed_4" / "trace.csv"));
  EXPECT_TRUE(fs::exists(tmp.path() / "dsgd" / "seed_5" / "trace.csv"));
}

TEST(Compare, MismatchedProblemsAreRejected) {
  TempDir tmp;
  json other = small_median("dsgd");
  other["problem"]["anchors"] = {0, 1, 2, 4};
  std::ostringstream log;
  EXPECT_THROW(compare({ExperimentConfig::from_json(small_median("dsgd")), ExperimentConfig::from_json(other)}, {1},
                       tmp.path(), log),
               InvalidInput);
}

}  // namespace
}  // namespace dsm
