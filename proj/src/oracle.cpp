#include "dsm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dsm/error.hpp"

namespace dsm {

Eigen::VectorXd sign_map_select(const Eigen::VectorXd& y) {
  Eigen::VectorXd out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) out(i) = y(i) > 0.0 ? 1.0 : (y(i) < 0.0 ? -1.0 : 0.0);
  return out;
}

double AgentObjective::full_value(const Eigen::VectorXd& x) const {
  double sum = 0.0;
  for (int j = 0; j < num_components(); ++j) sum += component_value(j, x);
  return sum / num_components();
}

Eigen::VectorXd AgentObjective::full_subgrad(const Eigen::VectorXd& x) const {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dimension());
  for (int j = 0; j < num_components(); ++j) sum += component_subgrad(j, x);
  return sum / num_components();
}

int sample_component(const AgentObjective& obj, CounterRng& stream) {
  return static_cast<int>(stream.uniform_index(static_cast<std::uint64_t>(obj.num_components())));
}

SubgradientSample subgrad(const AgentObjective& obj, int j, const Eigen::VectorXd& x) {
  if (j < 0 || j >= obj.num_components()) {
    throw OutOfRange("component index " + std::to_string(j) + " out of range");
  }
  if (x.size() != obj.dimension()) throw InvalidInput("subgrad: dimension mismatch");
  if (!x.allFinite()) throw InvalidInput("subgrad: non-finite evaluation point");
  return {j, obj.component_subgrad(j, x)};
}

GlobalObjective::GlobalObjective(std::vector<std::shared_ptr<const AgentObjective>> agents)
    : agents_(std::move(agents)) {
  if (agents_.empty()) throw InvalidInput("global objective needs at least one agent");
  for (const auto& a : agents_) {
    if (!a || a->num_components() < 1) throw InvalidInput("every agent needs at least one component");
    if (a->dimension() != agents_.front()->dimension()) {
      throw InvalidInput("agent objectives disagree on dimension");
    }
  }
}

double GlobalObjective::value(const Eigen::VectorXd& x) const {
  double sum = 0.0;
  for (const auto& a : agents_) sum += a->full_value(x);
  return sum / num_agents();
}

double GlobalObjective::stationarity(const Eigen::VectorXd& x, int num_samples) const {
  if (num_samples < 1) throw InvalidInput("stationarity needs num_samples >= 1");
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(dimension());
  for (const auto& a : agents_) {
    const int m = std::min(num_samples, a->num_components());
    Eigen::VectorXd s = Eigen::VectorXd::Zero(dimension());
    for (int j = 0; j < m; ++j) s += a->component_subgrad(j, x);
    avg += s / m;
  }
  return (avg / num_agents()).norm();
}

double GlobalObjective::iterations_per_epoch() const {
  int most = 1;
  for (const auto& a : agents_) most = std::max(most, a->num_components());
  return most;
}

double stationarity_measure(const GlobalObjective& g, const Eigen::VectorXd& x, int num_samples) {
  return g.stationarity(x, num_samples);
}

// ---------------------------------------------------------------------------

MedianAgent::MedianAgent(std::vector<double> anchors) : anchors_(std::move(anchors)) {
  if (anchors_.empty()) throw InvalidInput("median agent needs at least one anchor");
}

double MedianAgent::component_value(int j, const Eigen::VectorXd& x) const {
  return std::abs(x(0) - anchors_[j]);
}

Eigen::VectorXd MedianAgent::component_subgrad(int j, const Eigen::VectorXd& x) const {
  const double r = x(0) - anchors_[j];
  return Eigen::VectorXd::Constant(1, r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0));
}

double MedianAgent::stencil_kink_margin(int j, const Eigen::VectorXd& x, const Eigen::VectorXd& h) const {
  return std::abs(x(0) - anchors_[j]) - h(0);
}

L1QuadraticAgent::L1QuadraticAgent(std::vector<Eigen::VectorXd> centers, double lambda)
    : centers_(std::move(centers)), lambda_(lambda) {
  if (centers_.empty()) throw InvalidInput("l1_quadratic agent needs at least one center");
  for (const auto& c : centers_)
    if (c.size() != centers_.front().size() || c.size() == 0) throw InvalidInput("center dimension mismatch");
  if (!(lambda_ >= 0.0)) throw InvalidParameter("l1 weight lambda must be nonnegative");
}

double L1QuadraticAgent::component_value(int j, const Eigen::VectorXd& x) const {
  return 0.5 * (x - centers_[j]).squaredNorm() + lambda_ * x.lpNorm<1>();
}

Eigen::VectorXd L1QuadraticAgent::component_subgrad(int j, const Eigen::VectorXd& x) const {
  return (x - centers_[j]) + lambda_ * sign_map_select(x);
}

double L1QuadraticAgent::stencil_kink_margin(int, const Eigen::VectorXd& x, const Eigen::VectorXd& h) const {
  if (lambda_ == 0.0) return std::numeric_limits<double>::infinity();
  return (x.cwiseAbs() - h).minCoeff();
}

namespace {

class MedianProblem final : public GlobalObjective {
 public:
  using GlobalObjective::GlobalObjective;

  // D_f(x) is the interval sum of weighted sign sets; return its distance to 0.
  double stationarity(const Eigen::VectorXd& x, int num_samples) const override {
    if (num_samples < 1) throw InvalidInput("stationarity needs num_samples >= 1");
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < num_agents(); ++i) {
      const auto& a = static_cast<const MedianAgent&>(agent(i));
      const double w = 1.0 / (static_cast<double>(num_agents()) * a.num_components());
      for (double anchor : a.anchors()) {
        const double r = x(0) - anchor;
        lo += w * (r > 0.0 ? 1.0 : -1.0);
        hi += w * (r < 0.0 ? -1.0 : 1.0);
      }
    }
    if (lo <= 0.0 && 0.0 <= hi) return 0.0;
    return std::min(std::abs(lo), std::abs(hi));
  }
  bool stationarity_exact() const override { return true; }
};

class L1QuadraticProblem final : public GlobalObjective {
 public:
  using GlobalObjective::GlobalObjective;

  double stationarity(const Eigen::VectorXd& x, int num_samples) const override {
    if (num_samples < 1) throw InvalidInput("stationarity needs num_samples >= 1");
    Eigen::VectorXd cbar = Eigen::VectorXd::Zero(dimension());
    double lambda = 0.0;
    for (int i = 0; i < num_agents(); ++i) {
      const auto& a = static_cast<const L1QuadraticAgent&>(agent(i));
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(dimension());
      for (const auto& c : a.centers()) mean += c;
      cbar += mean / a.num_components();
      lambda += a.lambda();
    }
    cbar /= num_agents();
    lambda /= num_agents();
    // D_f(x) is a box: x - cbar + lambda * sign(x), coordinatewise.
    double sq = 0.0;
    for (Eigen::Index c = 0; c < x.size(); ++c) {
      const double smooth = x(c) - cbar(c);
      double dist = 0.0;
      if (x(c) != 0.0) {
        dist = std::abs(smooth + lambda * (x(c) > 0.0 ? 1.0 : -1.0));
      } else {
        dist = std::max(0.0, std::abs(smooth) - lambda);
      }
      sq += dist * dist;
    }
    return std::sqrt(sq);
  }
  bool stationarity_exact() const override { return true; }
};

}  // namespace

std::shared_ptr<GlobalObjective> make_median_problem(const std::vector<std::vector<double>>& anchors) {
  std::vector<std::shared_ptr<const AgentObjective>> agents;
  for (const auto& a : anchors) agents.push_back(std::make_shared<MedianAgent>(a));
  return std::make_shared<MedianProblem>(std::move(agents));
}

std::shared_ptr<GlobalObjective> make_l1_quadratic_problem(
    const std::vector<std::vector<Eigen::VectorXd>>& centers, double lambda) {
  std::vector<std::shared_ptr<const AgentObjective>> agents;
  for (const auto& c : centers) agents.push_back(std::make_shared<L1QuadraticAgent>(c, lambda));
  return std::make_shared<L1QuadraticProblem>(std::move(agents));
}

}  // namespace dsm
