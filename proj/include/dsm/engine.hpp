#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "dsm/algorithm.hpp"
#include "dsm/diagnostics.hpp"
#include "dsm/mixing.hpp"
#include "dsm/oracle.hpp"
#include "dsm/rng.hpp"
#include "dsm/schedule.hpp"

namespace dsm {

/// Optional zero-mean perturbation added to every sampled subgradient.
struct NoiseConfig {
  enum class Kind { None, Uniform, Gaussian };
  Kind kind = Kind::None;
  double scale = 0.0;  // half-width for uniform, standard deviation for gaussian
};

/// Per-agent subgradient sampling. Agent i draws from its own stream keyed by
/// (seed, i), so results do not depend on the order agents are visited in.
class OracleSet {
 public:
  OracleSet(std::shared_ptr<const GlobalObjective> objective, std::uint64_t seed, NoiseConfig noise = {});

  int num_agents() const noexcept { return objective_->num_agents(); }
  int dimension() const noexcept { return objective_->dimension(); }
  const GlobalObjective& objective() const noexcept { return *objective_; }
  CounterRng& stream(int agent) { return streams_.at(agent); }

  /// Column i is a selected subgradient of a uniformly sampled component of
  /// f_i at column i of x.
  Eigen::MatrixXd sample(const Eigen::MatrixXd& x);

 private:
  std::shared_ptr<const GlobalObjective> objective_;
  std::vector<CounterRng> streams_;
  NoiseConfig noise_;
};

/// Z W - eta (H + Xi). Throws InvalidInput on shape mismatch and
/// DivergenceError (tagged with k) if the result is not finite.
Eigen::MatrixXd dsm_step(const Eigen::MatrixXd& z, const MixingMatrix& w, const Eigen::MatrixXd& h,
                         const Eigen::MatrixXd& xi, double eta, std::int64_t k = -1);

struct DsgdStep {
  Eigen::MatrixXd x;  // X_{k+1}
  Eigen::MatrixXd d;  // D_k, sampled at X_k
};

DsgdStep dsgd_step(const Eigen::MatrixXd& x, const MixingMatrix& w, OracleSet& oracles,
                   const StepSchedule& schedule, std::int64_t k);

struct DgsgdmStep {
  Eigen::MatrixXd x;  // X_{k+1} = X_k W - eta_k Phi(Y_k)
  Eigen::MatrixXd y;  // Y_{k+1} = (1 - tau eta_k) Y_k W + tau eta_k D_{k+1}
  Eigen::MatrixXd d;  // D_{k+1}, sampled at X_{k+1}
  bool left_convex_regime = false;  // tau eta_k > 1
};

DgsgdmStep dgsgdm_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const MixingMatrix& w,
                       const AlgorithmConfig& config, OracleSet& oracles, const StepSchedule& schedule,
                       std::int64_t k);

/// Y_0 = (1 - tau eta0) D_0 W + tau eta0 D_0.
Eigen::MatrixXd initial_momentum(const Eigen::MatrixXd& d0, const MixingMatrix& w, double tau, double eta0);

struct DsgdTStep {
  Eigen::MatrixXd x;  // X_{k+1} = X_k W - eta_k V_k
  Eigen::MatrixXd v;  // V_{k+1} = (V_k + D_{k+1} - D_k) W
  Eigen::MatrixXd d;  // D_{k+1}, sampled at X_{k+1}
};

/// Throws InternalConsistencyError when V_{k+1} 1 departs from D_{k+1} 1 by
/// more than 1e-9 (the identity is preserved exactly in exact arithmetic
/// whenever the inputs satisfy it).
DsgdTStep dsgd_t_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& v, const Eigen::MatrixXd& d_prev,
                      const MixingMatrix& w, OracleSet& oracles, const StepSchedule& schedule, std::int64_t k);

inline constexpr double kTrackingTol = 1e-9;

struct RunOptions {
  std::int64_t iterations = 1000;
  std::int64_t record_stride = 10;
  double divergence_bound = 1e8;
  double bound_slack = 1e-9;
  std::size_t history_capacity = 0;   // 0 disables iterate history
  bool record_agent_values = false;
  bool surrogate_stationarity = false;  // evaluate the surrogate on non-exact problems
  int stationarity_samples = 1 << 30;
  NoiseConfig noise;
  enum class MomentumInit { Mixed, Zero, Subgradient };
  MomentumInit momentum_init = MomentumInit::Mixed;
};

struct RunResult {
  RunTrace trace;
  IterateHistory history{0};
};

/// Runs the configured algorithm from the initial local variables x0
/// (dimension x agents). Deterministic in (inputs, seed).
RunResult run(std::shared_ptr<const GlobalObjective> objective, const MixingMatrix& w,
              const AlgorithmConfig& config, const StepSchedule& schedule, const Eigen::MatrixXd& x0,
              std::uint64_t seed, const RunOptions& options);

}  // namespace dsm
