#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "dsm/error.hpp"
#include "dsm/schedule.hpp"

namespace dsm {
namespace {

StepSchedule three_drop_staircase() { return StepSchedule::staircase(0.2, 0.2, {60, 120, 160}); }

TEST(Polynomial, StartsAtEtaZero) { EXPECT_DOUBLE_EQ(StepSchedule::polynomial(0.3, 0.6).eta(0), 0.3); }

TEST(Polynomial, EtaLogAtOneMillion) {
  const StepSchedule s = StepSchedule::polynomial(1.0, 0.6);
  const double v = s.eta(1'000'000) * std::log(1e6);
  EXPECT_NEAR(v, 3.5e-3, 1e-4);
}

TEST(Polynomial, RejectsExponentOutsideUnitInterval) {
  EXPECT_THROW(StepSchedule::polynomial(0.1, 0.0), InvalidParameter);
  EXPECT_THROW(StepSchedule::polynomial(0.1, 1.5), InvalidParameter);
  EXPECT_THROW(StepSchedule::polynomial(-0.1, 0.5), InvalidParameter);
}

TEST(Staircase, FourSegments) {
  const StepSchedule s = three_drop_staircase();
  EXPECT_DOUBLE_EQ(s.eta(0), 0.2);
  EXPECT_DOUBLE_EQ(s.eta(59), 0.2);
  EXPECT_NEAR(s.eta(60), 0.04, 1e-15);
  EXPECT_NEAR(s.eta(130), 0.008, 1e-15);
  EXPECT_NEAR(s.eta(10'000), 0.0016, 1e-15);
}

TEST(Staircase, EpochBoundariesScaleWithEpochLength) {
  const StepSchedule s = schedule_from_json({{"schedule", "staircase"},
                                             {"eta0", 0.2},
                                             {"factor", 0.2},
                                             {"boundaries", {60, 120, 160}},
                                             {"boundary_unit", "epoch"}},
                                            8.0);
  EXPECT_EQ(s.boundaries(), (std::vector<std::int64_t>{480, 960, 1280}));
  EXPECT_DOUBLE_EQ(s.eta(479), 0.2);
  EXPECT_NEAR(s.eta(480), 0.04, 1e-15);
}

TEST(LambdaOf, Examples) {
  EXPECT_EQ(StepSchedule::polynomial(0.5, 0.6).lambda_of(0), 0.0);
  EXPECT_DOUBLE_EQ(StepSchedule::constant(1.0).lambda_of(5), 5.0);
  EXPECT_NEAR(three_drop_staircase().lambda_of(2), 0.4, 1e-15);
}

TEST(LambdaOf, StrictlyIncreasing) {
  const StepSchedule s = StepSchedule::log_damped(0.1);
  for (std::int64_t i = 0; i < 2000; ++i) EXPECT_LT(s.lambda_of(i), s.lambda_of(i + 1));
}

TEST(BigLambdaOf, Examples) {
  EXPECT_EQ(StepSchedule::constant(1.0).Lambda_of(3.5), 3);
  EXPECT_EQ(StepSchedule::polynomial(0.2, 0.6).Lambda_of(0.0), 0);
  EXPECT_EQ(three_drop_staircase().Lambda_of(0.3), 1);
}

TEST(BigLambdaOf, RoundTripBracketsTime) {
  for (const StepSchedule& s : {StepSchedule::polynomial(0.2, 0.6), StepSchedule::log_damped(0.5), three_drop_staircase(),
                                StepSchedule::constant(0.05)}) {
    for (double t : {0.0, 1e-9, 0.1, 0.2, 0.31, 1.0, 2.5, 7.0, 13.0}) {
      const std::int64_t k = s.Lambda_of(t);
      EXPECT_LE(s.lambda_of(k), t);
      EXPECT_LT(t, s.lambda_of(k + 1));
    }
  }
}

TEST(BigLambdaOf, RejectsNegativeTime) { EXPECT_THROW(StepSchedule::constant(1.0).Lambda_of(-1.0), InvalidInput); }

TEST(PrefixCache, ConcurrentReadersAgree) {
  const StepSchedule s = StepSchedule::polynomial(0.1, 0.5);
  std::vector<double> results(8);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&, i] { results[i] = s.lambda_of(50'000 + 1000 * (i % 2)); });
  for (auto& t : threads) t.join();
  const StepSchedule fresh = StepSchedule::polynomial(0.1, 0.5);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(results[i], fresh.lambda_of(50'000 + 1000 * (i % 2)));
}

TEST(Validate, PolynomialMeetsDecayThresholdAndDiverges) {
  const ScheduleReport r = StepSchedule::polynomial(0.2, 0.6).validate();
  EXPECT_TRUE(r.decreasing_to_zero);
  EXPECT_TRUE(r.divergent_sum);
  EXPECT_FALSE(r.empirical_only);
}

TEST(Validate, LogDampedEtaLogDecaysTowardZero) {
  const StepSchedule s = StepSchedule::log_damped(0.2);
  double prev = s.eta(100) * std::log(100.0);
  for (std::int64_t k : {1'000, 10'000, 100'000, 1'000'000, 10'000'000}) {
    const double v = s.eta(k) * std::log(static_cast<double>(k));
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_TRUE(s.validate().divergent_sum);
}

TEST(Validate, StaircaseIsEmpiricalOnly) {
  const ScheduleReport r = three_drop_staircase().validate(100'000);
  EXPECT_TRUE(r.empirical_only);
  EXPECT_FALSE(r.decreasing_to_zero);
}

TEST(ScheduleJson, RoundTrips) {
  for (const StepSchedule& s : {StepSchedule::polynomial(0.2, 0.6), StepSchedule::log_damped(0.5), three_drop_staircase()}) {
    const StepSchedule back = schedule_from_json(schedule_to_json(s));
    for (std::int64_t k : {0, 1, 59, 60, 200, 5000}) EXPECT_EQ(back.eta(k), s.eta(k));
  }
}

}  // namespace
}  // namespace dsm
