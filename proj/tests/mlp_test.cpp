#include <gtest/gtest.h>

#include <cmath>

#include "dsm/mlp.hpp"
#include "dsm/rng.hpp"

namespace dsm {
namespace {

TEST(ReluMlp, ZeroWeightsZeroTargets) {
  const MlpShape shape;
  LabeledBatch batch{Eigen::MatrixXd::Random(shape.input, 5), Eigen::VectorXd::Zero(5)};
  const auto [loss, g] = relu_mlp_loss_and_subgrad(shape, Eigen::VectorXd::Zero(shape.param_count()), batch);
  EXPECT_EQ(loss, 0.0);
  EXPECT_EQ(g, Eigen::VectorXd::Zero(shape.param_count()));
}

TEST(ReluMlp, SingleHiddenUnitHandChainRule) {
  // out = w2 * relu(w1 * x + b1) + b2, loss = 0.5 (out - y)^2.
  const MlpShape shape{1, 1};
  ASSERT_EQ(shape.param_count(), 4);
  Eigen::VectorXd p(4);
  p << 2.0, 0.5, 3.0, -1.0;  // w1, b1, w2, b2
  LabeledBatch batch{Eigen::MatrixXd::Constant(1, 1, 1.5), Eigen::VectorXd::Constant(1, 4.0)};
  const double pre = 2.0 * 1.5 + 0.5;   // 3.5
  const double out = 3.0 * pre - 1.0;   // 9.5
  const double r = out - 4.0;           // 5.5
  const auto [loss, g] = relu_mlp_loss_and_subgrad(shape, p, batch);
  EXPECT_DOUBLE_EQ(loss, 0.5 * r * r);
  EXPECT_DOUBLE_EQ(g(0), r * 3.0 * 1.5);
  EXPECT_DOUBLE_EQ(g(1), r * 3.0);
  EXPECT_DOUBLE_EQ(g(2), r * pre);
  EXPECT_DOUBLE_EQ(g(3), r);
}

TEST(ReluMlp, ZeroPreactivationSelectsZeroDerivative) {
  const MlpShape shape{1, 1};
  Eigen::VectorXd p(4);
  p << 1.0, -1.0, 2.0, 0.0;
  LabeledBatch batch{Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::VectorXd::Constant(1, 1.0)};
  const auto [loss, g] = relu_mlp_loss_and_subgrad(shape, p, batch);
  EXPECT_DOUBLE_EQ(loss, 0.5);
  EXPECT_EQ(g(0), 0.0);
  EXPECT_EQ(g(1), 0.0);
  EXPECT_EQ(g(3), -1.0);
}

class ReluMlpFd : public ::testing::TestWithParam<MlpLoss> {};

TEST_P(ReluMlpFd, RandomSmoothPointsMatchCentralDifferences) {
  MlpProblemSpec spec;
  spec.loss = GetParam();
  const LabeledBatch data = make_synthetic_dataset(spec);
  const ReluMlpAgent agent(spec.shape, data, spec.batch_size, spec.loss);
  CounterRng rng(77, 5);
  int tested = 0;
  while (tested < 50) {
    const Eigen::VectorXd x = init_mlp_params(spec.shape, rng);
    const int j = static_cast<int>(rng.uniform_index(agent.num_components()));
    Eigen::VectorXd h = 1e-6 * (Eigen::VectorXd::Ones(x.size()) + x.cwiseAbs());
    if (agent.stencil_kink_margin(j, x, h) < 1e-7) continue;
    const Eigen::VectorXd g = agent.component_subgrad(j, x);
    double worst = 0.0;
    for (Eigen::Index c = 0; c < x.size(); ++c) {
      Eigen::VectorXd xp = x, xm = x;
      xp(c) += h(c);
      xm(c) -= h(c);
      const double fd = (agent.component_value(j, xp) - agent.component_value(j, xm)) / (xp(c) - xm(c));
      worst = std::max(worst, std::abs(fd - g(c)));
    }
    EXPECT_LE(worst, 1e-5 * std::max(1.0, g.cwiseAbs().maxCoeff()));
    ++tested;
  }
}

INSTANTIATE_TEST_SUITE_P(Losses, ReluMlpFd, ::testing::Values(MlpLoss::SquaredError, MlpLoss::Logistic),
                         [](const auto& info) {
                           return info.param == MlpLoss::SquaredError ? std::string("squared") : std::string("logistic");
                         });

TEST(SyntheticData, DeterministicPerSeed) {
  MlpProblemSpec spec;
  const LabeledBatch a = make_synthetic_dataset(spec);
  const LabeledBatch b = make_synthetic_dataset(spec);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.targets, b.targets);
  EXPECT_EQ(a.size(), 512);
  spec.data_seed = 8;
  EXPECT_NE(make_synthetic_dataset(spec).targets, a.targets);
  EXPECT_EQ(dataset_to_csv(a), dataset_to_csv(b));
}

TEST(ReluMlpProblem, ShardsCoverAllSamples) {
  const MlpProblemSpec spec;
  const auto g = make_relu_mlp_problem(spec, 4);
  ASSERT_EQ(g->num_agents(), 4);
  int batches = 0;
  for (int i = 0; i < 4; ++i) batches += g->agent(i).num_components();
  EXPECT_EQ(batches, 512 / 16);
  EXPECT_DOUBLE_EQ(g->iterations_per_epoch(), 8.0);
}

}  // namespace
}  // namespace dsm
