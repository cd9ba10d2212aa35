#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsm/algorithm.hpp"
#include "dsm/oracle.hpp"
#include "dsm/schedule.hpp"

namespace dsm {

/// One recorded iteration. State fields describe Z_k; the step fields
/// describe the transition k -> k+1 and are NaN on the closing record.
struct TraceRecord {
  std::int64_t k = 0;
  double eta = 0.0;
  double lambda = 0.0;
  double f_avg = 0.0;
  double consensus_error = 0.0;
  std::optional<double> lyapunov;
  std::optional<double> stationarity;
  double z_norm = 0.0;

  double zperp_norm = 0.0;  // ||Z_k P_perp||_F
  double zperp_next = 0.0;  // ||Z_{k+1} P_perp||_F
  double step_norm = 0.0;   // ||eta_k (H_k + Xi_{k+1})||_F

  std::vector<double> agent_values;  // f(x_{i,k}), when requested
};

struct RunTrace {
  AlgorithmConfig algorithm;
  double contraction = 0.0;
  std::int64_t iterations_requested = 0;
  std::int64_t iterations_completed = 0;
  std::vector<TraceRecord> records;

  bool diverged = false;
  std::int64_t diverged_at = -1;
  std::string divergence_message;

  // Checked at every iteration, not only recorded ones.
  std::int64_t bound_checks = 0;
  std::int64_t bound_violations = 0;
  double max_bound_excess = -std::numeric_limits<double>::infinity();
  double max_average_recursion_error = 0.0;
  double max_tracking_deviation = 0.0;   // DSGD-T
  double max_sign_step_deviation = 0.0;  // DGSGDm with l1_norm
  std::int64_t convex_regime_warnings = 0;

  Eigen::MatrixXd final_x;
  Eigen::MatrixXd final_aux;  // Y for DGSGDm, V for DSGD-T
  std::vector<std::string> warnings;
};

/// (1/sqrt(d)) ||X (I - P)||_F.
double consensus_error(const Eigen::MatrixXd& x);

/// Z (I - e 1^T): each column minus the column average.
Eigen::MatrixXd disagreement(const Eigen::MatrixXd& z);

/// Z e, the average iterate.
Eigen::VectorXd average_column(const Eigen::MatrixXd& z);

/// f(xbar) + phi(ybar) / tau.
double lyapunov_dgsgdm(const Eigen::VectorXd& xbar, const Eigen::VectorXd& ybar, double tau, Phi phi,
                       const GlobalObjective& objective);

/// Average iterates z_bar_k for consecutive k, capped to the most recent
/// `capacity` entries.
class IterateHistory {
 public:
  explicit IterateHistory(std::size_t capacity) : capacity_(capacity) {}

  void push(std::int64_t k, const Eigen::VectorXd& zbar);
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  std::int64_t first_k() const noexcept { return first_k_; }
  std::int64_t last_k() const noexcept { return first_k_ + static_cast<std::int64_t>(entries_.size()) - 1; }
  const Eigen::VectorXd& at(std::int64_t k) const;
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t capacity_;
  std::int64_t first_k_ = 0;
  std::deque<Eigen::VectorXd> entries_;
};

/// Piecewise-linear interpolation of the average iterates on the time axis
/// lambda(k): u(lambda(k) + s) = z_k + s (z_{k+1} - z_k) / eta_k. Throws
/// OutOfRange outside [lambda(first_k), lambda(last_k)].
Eigen::VectorXd interpolate(const IterateHistory& history, const StepSchedule& schedule, double t);

struct ConsensusDecayReport {
  std::size_t records_checked = 0;
  std::size_t violations = 0;
  double violation_fraction = 0.0;
  double max_excess = -std::numeric_limits<double>::infinity();
  double tail_mean_consensus_error = 0.0;
  std::size_t tail_window = 0;
  // Per-iteration tallies copied from the trace.
  std::int64_t all_iteration_checks = 0;
  std::int64_t all_iteration_violations = 0;

  bool passed() const noexcept { return violations == 0 && all_iteration_violations == 0; }
};

/// Checks ||Z_perp,k+1|| <= (1 - alpha) ||Z_perp,k|| + ||eta_k (H_k + Xi_k+1)|| + slack
/// at every recorded k, with 1 - alpha the trace's contraction factor.
ConsensusDecayReport consensus_decay_check(const RunTrace& trace, double slack = 1e-9, std::size_t tail = 100);

/// max - min of the last `fraction` of values (at least one value).
double windowed_oscillation(const std::vector<double>& values, double fraction = 0.25);

}  // namespace dsm
