#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dsm/oracle.hpp"

namespace dsm {

enum class MlpLoss { SquaredError, Logistic };

/// Two-layer network x -> w2 . relu(W1 x + b1) + b2 with scalar output.
/// Flattened parameter layout: W1 (row-major, hidden x input), b1, w2, b2.
struct MlpShape {
  int input = 8;
  int hidden = 16;

  int param_count() const noexcept { return hidden * input + 2 * hidden + 1; }
};

/// Columns of `inputs` are samples.
struct LabeledBatch {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd targets;

  Eigen::Index size() const noexcept { return targets.size(); }
};

/// Mean loss over the batch and its reverse-mode subgradient with
/// ReLU'(0) = 0. Squared error is 0.5 (out - y)^2; logistic takes targets in
/// {0, 1} and is softplus(out) - y out.
std::pair<double, Eigen::VectorXd> relu_mlp_loss_and_subgrad(const MlpShape& shape,
                                                             const Eigen::VectorXd& params,
                                                             const LabeledBatch& batch,
                                                             MlpLoss loss = MlpLoss::SquaredError);

double relu_mlp_loss(const MlpShape& shape, const Eigen::VectorXd& params, const LabeledBatch& batch,
                     MlpLoss loss = MlpLoss::SquaredError);

struct MlpProblemSpec {
  MlpShape shape;
  int samples = 512;
  int batch_size = 16;
  int teacher_hidden = 4;
  double label_noise = 0.05;
  std::uint64_t data_seed = 7;
  MlpLoss loss = MlpLoss::SquaredError;
};

/// Teacher-student regression data: x ~ N(0, I), y = teacher(x) + noise,
/// teacher a random ReLU network of width teacher_hidden. For the logistic
/// loss the label is 1 when teacher(x) + noise > median, else 0.
LabeledBatch make_synthetic_dataset(const MlpProblemSpec& spec);

/// CSV with columns x0..x{n-1},y, one sample per line.
std::string dataset_to_csv(const LabeledBatch& data);

/// Agent holding a shard of the dataset, split into fixed mini-batches;
/// component j is the mean loss over mini-batch j.
class ReluMlpAgent final : public AgentObjective {
 public:
  ReluMlpAgent(MlpShape shape, LabeledBatch shard, int batch_size, MlpLoss loss);

  int dimension() const override { return shape_.param_count(); }
  int num_components() const override { return static_cast<int>(batches_.size()); }
  double component_value(int j, const Eigen::VectorXd& x) const override;
  Eigen::VectorXd component_subgrad(int j, const Eigen::VectorXd& x) const override;
  double stencil_kink_margin(int j, const Eigen::VectorXd& x, const Eigen::VectorXd& h) const override;

 private:
  MlpShape shape_;
  std::vector<LabeledBatch> batches_;
  MlpLoss loss_;
};

/// Splits the synthetic dataset evenly (contiguous shards) over d agents.
/// Stationarity is the surrogate norm of the averaged full-batch subgradient.
std::shared_ptr<GlobalObjective> make_relu_mlp_problem(const MlpProblemSpec& spec, int num_agents);

/// He-style initialisation: W1 ~ N(0, 2/input), w2 ~ N(0, 1/hidden), biases 0.
Eigen::VectorXd init_mlp_params(const MlpShape& shape, CounterRng& rng);

}  // namespace dsm
