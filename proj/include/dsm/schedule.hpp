#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dsm {

enum class ScheduleKind { Polynomial, LogDamped, Staircase, Constant };

std::string to_string(ScheduleKind kind);

struct ScheduleReport {
  bool decreasing_to_zero = false;   // o(1/log k) decay, checked numerically
  bool divergent_sum = false;        // partial sums exceed the probe bound
  bool empirical_only = false;       // staircase / constant: not asymptotically compliant
  double eta_log_at_horizon = 0.0;   // eta_K * log(K) at the probe horizon
  std::int64_t horizon = 0;
};

/// Step-size sequence eta_k, k >= 0, with cached prefix sums
/// lambda(i) = eta_0 + ... + eta_{i-1}.
///
///   polynomial  eta0 / (1 + k)^p,            p in (0, 1]
///   log_damped  eta0 / (1 + log(1 + k))^2
///   staircase   eta0 * factor^(#boundaries <= k)
///   constant    eta0 (tests and diagnostics only)
///
/// Reads are thread-safe; the prefix-sum cache grows under a mutex.
class StepSchedule {
 public:
  static StepSchedule polynomial(double eta0, double p);
  static StepSchedule log_damped(double eta0);
  static StepSchedule staircase(double eta0, double factor, std::vector<std::int64_t> boundaries);
  static StepSchedule constant(double eta0);

  StepSchedule(const StepSchedule& other);
  StepSchedule& operator=(const StepSchedule& other);

  ScheduleKind kind() const noexcept { return kind_; }
  double eta0() const noexcept { return eta0_; }
  double exponent() const noexcept { return exponent_; }
  double factor() const noexcept { return factor_; }
  const std::vector<std::int64_t>& boundaries() const noexcept { return boundaries_; }

  double eta(std::int64_t k) const;
  double lambda_of(std::int64_t i) const;
  /// Largest p with lambda(p) <= t.
  std::int64_t Lambda_of(double t) const;

  /// Numerical probe of the diminishing-step conditions over [0, horizon].
  ScheduleReport validate(std::int64_t horizon = 10'000'000) const;

 private:
  StepSchedule(ScheduleKind kind, double eta0, double exponent, double factor,
               std::vector<std::int64_t> boundaries);
  void extend_to(std::int64_t i) const;  // caller holds mutex_

  ScheduleKind kind_;
  double eta0_;
  double exponent_ = 0.0;
  double factor_ = 1.0;
  std::vector<std::int64_t> boundaries_;

  mutable std::mutex mutex_;
  mutable std::vector<double> prefix_{0.0};
};

/// {"schedule": "polynomial"|"log_damped"|"staircase"|"constant", "eta0",
///  "p"?, "factor"?, "boundaries"?, "boundary_unit"?: "iteration"|"epoch"}.
/// Epoch boundaries are multiplied by epoch_length and rounded.
StepSchedule schedule_from_json(const nlohmann::json& spec, double epoch_length = 1.0);
nlohmann::json schedule_to_json(const StepSchedule& s);

}  // namespace dsm
