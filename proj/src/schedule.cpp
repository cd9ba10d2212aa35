#include "dsm/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "dsm/error.hpp"
#include "dsm/format.hpp"

namespace dsm {

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Polynomial: return "polynomial";
    case ScheduleKind::LogDamped: return "log_damped";
    case ScheduleKind::Staircase: return "staircase";
    case ScheduleKind::Constant: return "constant";
  }
  return "unknown";
}

namespace {

void require_positive_eta0(double eta0) {
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) {
    throw InvalidParameter("eta0 must be positive and finite, got " + format_double(eta0));
  }
}

}  // namespace

StepSchedule::StepSchedule(ScheduleKind kind, double eta0, double exponent, double factor,
                           std::vector<std::int64_t> boundaries)
    : kind_(kind), eta0_(eta0), exponent_(exponent), factor_(factor), boundaries_(std::move(boundaries)) {}

StepSchedule::StepSchedule(const StepSchedule& other)
    : kind_(other.kind_),
      eta0_(other.eta0_),
      exponent_(other.exponent_),
      factor_(other.factor_),
      boundaries_(other.boundaries_) {}

StepSchedule& StepSchedule::operator=(const StepSchedule& other) {
  if (this != &other) {
    std::scoped_lock lock(mutex_);
    kind_ = other.kind_;
    eta0_ = other.eta0_;
    exponent_ = other.exponent_;
    factor_ = other.factor_;
    boundaries_ = other.boundaries_;
    prefix_.assign(1, 0.0);
  }
  return *this;
}

StepSchedule StepSchedule::polynomial(double eta0, double p) {
  require_positive_eta0(eta0);
  if (!(p > 0.0 && p <= 1.0)) {
    throw InvalidParameter("polynomial exponent p must lie in (0, 1], got " + format_double(p));
  }
  return StepSchedule(ScheduleKind::Polynomial, eta0, p, 1.0, {});
}

StepSchedule StepSchedule::log_damped(double eta0) {
  require_positive_eta0(eta0);
  return StepSchedule(ScheduleKind::LogDamped, eta0, 2.0, 1.0, {});
}

StepSchedule StepSchedule::staircase(double eta0, double factor, std::vector<std::int64_t> boundaries) {
  require_positive_eta0(eta0);
  if (!(factor > 0.0 && factor <= 1.0)) {
    throw InvalidParameter("staircase factor must lie in (0, 1], got " + format_double(factor));
  }
  for (std::size_t i = 0; i < boundaries.size(); ++i) {
    if (boundaries[i] < 1 || (i > 0 && boundaries[i] <= boundaries[i - 1])) {
      throw InvalidParameter("staircase boundaries must be positive and strictly increasing");
    }
  }
  return StepSchedule(ScheduleKind::Staircase, eta0, 0.0, factor, std::move(boundaries));
}

StepSchedule StepSchedule::constant(double eta0) {
  require_positive_eta0(eta0);
  return StepSchedule(ScheduleKind::Constant, eta0, 0.0, 1.0, {});
}

double StepSchedule::eta(std::int64_t k) const {
  if (k < 0) throw InvalidInput("iteration index must be nonnegative");
  const auto kd = static_cast<double>(k);
  switch (kind_) {
    case ScheduleKind::Polynomial:
      return eta0_ / std::pow(1.0 + kd, exponent_);
    case ScheduleKind::LogDamped: {
      const double l = 1.0 + std::log1p(kd);
      return eta0_ / (l * l);
    }
    case ScheduleKind::Staircase: {
      const auto passed = std::upper_bound(boundaries_.begin(), boundaries_.end(), k) - boundaries_.begin();
      double e = eta0_;
      for (std::ptrdiff_t i = 0; i < passed; ++i) e *= factor_;
      return e;
    }
    case ScheduleKind::Constant:
      return eta0_;
  }
  return eta0_;
}

void StepSchedule::extend_to(std::int64_t i) const {
  auto have = static_cast<std::int64_t>(prefix_.size()) - 1;
  if (have >= i) return;
  prefix_.reserve(static_cast<std::size_t>(i) + 1);
  for (; have < i; ++have) prefix_.push_back(prefix_.back() + eta(have));
}

double StepSchedule::lambda_of(std::int64_t i) const {
  if (i < 0) throw InvalidInput("lambda index must be nonnegative");
  std::scoped_lock lock(mutex_);
  extend_to(i);
  return prefix_[static_cast<std::size_t>(i)];
}

std::int64_t StepSchedule::Lambda_of(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("Lambda argument must be finite and >= 0");
  std::scoped_lock lock(mutex_);
  // Grow geometrically until the cache covers t; every kind has a divergent
  // step sum so this terminates.
  while (prefix_.back() <= t) {
    extend_to(std::max<std::int64_t>(64, 2 * static_cast<std::int64_t>(prefix_.size())));
  }
  const auto it = std::upper_bound(prefix_.begin(), prefix_.end(), t);
  return static_cast<std::int64_t>(it - prefix_.begin()) - 1;
}

ScheduleReport StepSchedule::validate(std::int64_t horizon) const {
  ScheduleReport r;
  r.horizon = horizon;
  r.empirical_only = kind_ == ScheduleKind::Staircase || kind_ == ScheduleKind::Constant;
  const double log_k = std::log(static_cast<double>(horizon));
  r.eta_log_at_horizon = eta(horizon) * log_k;
  r.decreasing_to_zero = !r.empirical_only && r.eta_log_at_horizon < 0.01 * eta0_ * std::log(2.0);

  // Divergence probe: partial sum over the horizon must exceed a bound that
  // any summable tail of comparable size would not reach.
  double sum = 0.0;
  for (std::int64_t k = 0; k < horizon; ++k) sum += eta(k);
  r.divergent_sum = sum > 10.0 * eta0_;
  return r;
}

StepSchedule schedule_from_json(const nlohmann::json& spec, double epoch_length) {
  const std::string kind = spec.at("schedule").get<std::string>();
  const double eta0 = spec.at("eta0").get<double>();
  if (kind == "polynomial") return StepSchedule::polynomial(eta0, spec.at("p").get<double>());
  if (kind == "log_damped") return StepSchedule::log_damped(eta0);
  if (kind == "constant") return StepSchedule::constant(eta0);
  if (kind == "staircase") {
    const std::string unit = spec.value("boundary_unit", std::string("iteration"));
    if (unit != "iteration" && unit != "epoch") throw InvalidParameter("boundary_unit must be iteration or epoch");
    const double scale = unit == "epoch" ? epoch_length : 1.0;
    std::vector<std::int64_t> b;
    for (const auto& v : spec.value("boundaries", nlohmann::json::array())) {
      b.push_back(static_cast<std::int64_t>(std::llround(v.get<double>() * scale)));
    }
    return StepSchedule::staircase(eta0, spec.value("factor", 0.2), std::move(b));
  }
  throw InvalidParameter("unknown schedule '" + kind + "'");
}

nlohmann::json schedule_to_json(const StepSchedule& s) {
  nlohmann::json j = {{"schedule", to_string(s.kind())}, {"eta0", s.eta0()}};
  if (s.kind() == ScheduleKind::Polynomial) j["p"] = s.exponent();
  if (s.kind() == ScheduleKind::Staircase) {
    j["factor"] = s.factor();
    j["boundaries"] = s.boundaries();
  }
  return j;
}

}  // namespace dsm
