#include <gtest/gtest.h>

#include <sstream>

#include "dsm/suite.hpp"

namespace dsm {
namespace {

TEST(Suite, InjectedMixingFaultFailsTheDoublyStochasticCriterion) {
  SuiteOptions o;
  o.filter = "doubly-stochastic";
  o.corrupt_mixing = true;
  std::ostringstream log;
  const auto results = run_acceptance_suite(o, log);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].id, 1);
  EXPECT_FALSE(results[0].passed);
  EXPECT_NE(log.str().find("FAIL"), std::string::npos);
}

TEST(Suite, FilterSelectsConsensusCriteriaOnly) {
  SuiteOptions o;
  o.filter = "consensus";
  std::ostringstream log;
  const auto results = run_acceptance_suite(o, log);
  std::vector<int> ids;
  for (const auto& r : results) ids.push_back(r.id);
  EXPECT_EQ(ids, (std::vector<int>{6, 7, 11}));
}

TEST(Suite, CliExitCodeReflectsFailure) {
  SuiteOptions o;
  o.filter = "spectral";
  std::ostringstream out;
  EXPECT_EQ(cli_suite(o, out), 0);
  o.filter = "mixing-invariants";
  o.corrupt_mixing = true;
  EXPECT_EQ(cli_suite(o, out), 3);
}

}  // namespace
}  // namespace dsm
