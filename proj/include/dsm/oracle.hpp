#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "dsm/rng.hpp"

namespace dsm {

/// Coordinatewise selection from the set-valued sign map: -1, 0 or +1.
/// sign(0) selects 0.
Eigen::VectorXd sign_map_select(const Eigen::VectorXd& y);

/// f_i = (1/N_i) sum_j f_{i,j}. Component subgradients are selections from
/// a conservative field of f_{i,j}; the selection conventions are
/// |.|'(0) = 0, sign(0) = 0, ReLU'(0) = 0.
class AgentObjective {
 public:
  virtual ~AgentObjective() = default;

  virtual int dimension() const = 0;
  virtual int num_components() const = 0;
  virtual double component_value(int j, const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd component_subgrad(int j, const Eigen::VectorXd& x) const = 0;

  /// Distance from the central-difference stencil {x +/- h_c e_c} to the
  /// nearest point where component j is not differentiable. Negative when
  /// the stencil straddles a kink.
  virtual double stencil_kink_margin(int j, const Eigen::VectorXd& x, const Eigen::VectorXd& h) const = 0;

  virtual double full_value(const Eigen::VectorXd& x) const;
  virtual Eigen::VectorXd full_subgrad(const Eigen::VectorXd& x) const;
};

struct SubgradientSample {
  int component = 0;
  Eigen::VectorXd g;
};

/// Uniform index in [0, N_i) drawn from the agent's own stream.
int sample_component(const AgentObjective& obj, CounterRng& stream);

/// Selected conservative-field element of component j at x. Throws
/// InvalidInput for non-finite x or an out-of-range component.
SubgradientSample subgrad(const AgentObjective& obj, int j, const Eigen::VectorXd& x);

/// f = (1/d) sum_i f_i over the agents' objectives.
class GlobalObjective {
 public:
  explicit GlobalObjective(std::vector<std::shared_ptr<const AgentObjective>> agents);
  virtual ~GlobalObjective() = default;

  int num_agents() const noexcept { return static_cast<int>(agents_.size()); }
  int dimension() const noexcept { return agents_.front()->dimension(); }
  const AgentObjective& agent(int i) const { return *agents_.at(i); }

  double value(const Eigen::VectorXd& x) const;

  /// dist(0, D_f(x)) where an exact formula is known; otherwise the norm of
  /// the average over agents of subgradients over the first num_samples
  /// components of each agent (full batch once num_samples >= N_i). The
  /// surrogate is not claimed to bound the true measure.
  virtual double stationarity(const Eigen::VectorXd& x, int num_samples) const;
  virtual bool stationarity_exact() const { return false; }

  /// Iterations that make up one pass over an agent's components.
  double iterations_per_epoch() const;

 private:
  std::vector<std::shared_ptr<const AgentObjective>> agents_;
};

double stationarity_measure(const GlobalObjective& g, const Eigen::VectorXd& x, int num_samples);

/// Scalar components f_{i,j}(x) = |x - a_j|.
class MedianAgent final : public AgentObjective {
 public:
  explicit MedianAgent(std::vector<double> anchors);

  int dimension() const override { return 1; }
  int num_components() const override { return static_cast<int>(anchors_.size()); }
  double component_value(int j, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd component_subgrad(int j, const Eigen::VectorXd& x) const override;
  double stencil_kink_margin(int j, const Eigen::VectorXd& x, const Eigen::VectorXd& h) const override;

  const std::vector<double>& anchors() const noexcept { return anchors_; }

 private:
  std::vector<double> anchors_;
};

/// f_{i,j}(x) = 0.5 ||x - c_j||^2 + lambda ||x||_1.
class L1QuadraticAgent final : public AgentObjective {
 public:
  L1QuadraticAgent(std::vector<Eigen::VectorXd> centers, double lambda);

  int dimension() const override { return static_cast<int>(centers_.front().size()); }
  int num_components() const override { return static_cast<int>(centers_.size()); }
  double component_value(int j, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd component_subgrad(int j, const Eigen::VectorXd& x) const override;
  double stencil_kink_margin(int j, const Eigen::VectorXd& x, const Eigen::VectorXd& h) const override;

  const std::vector<Eigen::VectorXd>& centers() const noexcept { return centers_; }
  double lambda() const noexcept { return lambda_; }

 private:
  std::vector<Eigen::VectorXd> centers_;
  double lambda_;
};

/// Decentralized median: agent i holds anchors a_{i,.}. Critical set of f is
/// the set of weighted medians; stationarity is exact.
std::shared_ptr<GlobalObjective> make_median_problem(const std::vector<std::vector<double>>& anchors);

/// Quadratic-plus-l1 corpus; stationarity is exact.
std::shared_ptr<GlobalObjective> make_l1_quadratic_problem(
    const std::vector<std::vector<Eigen::VectorXd>>& centers, double lambda);

}  // namespace dsm
