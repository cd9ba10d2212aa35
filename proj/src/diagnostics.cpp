#include "dsm/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "dsm/error.hpp"
#include "dsm/format.hpp"

namespace dsm {

Eigen::VectorXd average_column(const Eigen::MatrixXd& z) {
  const Eigen::VectorXd e = Eigen::VectorXd::Constant(z.cols(), 1.0 / static_cast<double>(z.cols()));
  return z * e;
}

Eigen::MatrixXd disagreement(const Eigen::MatrixXd& z) {
  if (z.cols() == 0) return z;
  return z.colwise() - average_column(z);
}

double consensus_error(const Eigen::MatrixXd& x) {
  if (x.cols() == 0) return 0.0;
  return disagreement(x).norm() / std::sqrt(static_cast<double>(x.cols()));
}

double lyapunov_dgsgdm(const Eigen::VectorXd& xbar, const Eigen::VectorXd& ybar, double tau, Phi phi,
                       const GlobalObjective& objective) {
  if (!(tau > 0.0)) throw InvalidParameter("lyapunov: tau must be positive");
  return objective.value(xbar) + phi_value(phi, ybar) / tau;
}

void IterateHistory::push(std::int64_t k, const Eigen::VectorXd& zbar) {
  if (capacity_ == 0) return;
  if (!entries_.empty() && k != last_k() + 1) {
    throw InvalidInput("iterate history must be pushed for consecutive k");
  }
  if (entries_.empty()) first_k_ = k;
  entries_.push_back(zbar);
  if (entries_.size() > capacity_) {
    entries_.pop_front();
    ++first_k_;
  }
}

const Eigen::VectorXd& IterateHistory::at(std::int64_t k) const {
  if (entries_.empty() || k < first_k_ || k > last_k()) {
    throw OutOfRange("iterate " + std::to_string(k) + " not retained in history");
  }
  return entries_[static_cast<std::size_t>(k - first_k_)];
}

Eigen::VectorXd interpolate(const IterateHistory& history, const StepSchedule& schedule, double t) {
  if (history.empty()) throw OutOfRange("interpolate: empty history");
  const double t0 = schedule.lambda_of(history.first_k());
  const double t1 = schedule.lambda_of(history.last_k());
  if (!(t >= t0 && t <= t1)) {
    throw OutOfRange("interpolate: t = " + format_double(t) + " outside recorded horizon [" + format_double(t0) +
                     ", " + format_double(t1) + "]");
  }
  const std::int64_t k = std::min(schedule.Lambda_of(t), history.last_k());
  if (k == history.last_k()) return history.at(k);
  const double s = t - schedule.lambda_of(k);
  return history.at(k) + s * (history.at(k + 1) - history.at(k)) / schedule.eta(k);
}

ConsensusDecayReport consensus_decay_check(const RunTrace& trace, double slack, std::size_t tail) {
  ConsensusDecayReport r;
  const double rate = trace.contraction;
  for (const auto& rec : trace.records) {
    if (std::isnan(rec.step_norm) || std::isnan(rec.zperp_next)) continue;
    ++r.records_checked;
    const double excess = rec.zperp_next - (rate * rec.zperp_norm + rec.step_norm);
    r.max_excess = std::max(r.max_excess, excess);
    if (excess > slack) ++r.violations;
  }
  r.violation_fraction = r.records_checked ? static_cast<double>(r.violations) / r.records_checked : 0.0;

  const std::size_t n = trace.records.size();
  r.tail_window = std::min(tail, n);
  double sum = 0.0;
  for (std::size_t i = n - r.tail_window; i < n; ++i) sum += trace.records[i].consensus_error;
  r.tail_mean_consensus_error = r.tail_window ? sum / r.tail_window : 0.0;

  r.all_iteration_checks = trace.bound_checks;
  r.all_iteration_violations = trace.bound_violations;
  return r;
}

double windowed_oscillation(const std::vector<double>& values, double fraction) {
  if (values.empty()) return 0.0;
  const auto n = values.size();
  const auto window = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * n)));
  const auto begin = values.end() - static_cast<std::ptrdiff_t>(std::min(window, n));
  const auto [lo, hi] = std::minmax_element(begin, values.end());
  return *hi - *lo;
}

}  // namespace dsm
