#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dsm/error.hpp"
#include "dsm/graph.hpp"
#include "dsm/mixing.hpp"

namespace dsm {
namespace {

TEST(Metropolis, RingOfFourIsOneThirdEverywhereOnSupport) {
  const Eigen::MatrixXd w = metropolis(build_ring(4)).matrix();
  for (int i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(w(i, i), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(w(i, (i + 1) % 4), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(w(i, (i + 3) % 4), 1.0 / 3.0);
    EXPECT_EQ(w(i, (i + 2) % 4), 0.0);
  }
}

TEST(Metropolis, SingleEdgeIsHalfHalf) {
  const Eigen::MatrixXd w = metropolis(build_ring(2)).matrix();
  EXPECT_TRUE(w.isApprox(Eigen::MatrixXd::Constant(2, 2, 0.5)));
}

TEST(Metropolis, ContractionMatchesCirculantSpectrum) {
  EXPECT_NEAR(contraction_factor(metropolis(build_ring(4))), 1.0 / 3.0, 1e-10);
  EXPECT_NEAR(contraction_factor(metropolis(build_ring(8))), (1.0 + 2.0 * std::cos(std::numbers::pi / 4)) / 3.0,
              1e-10);
}

TEST(Metropolis, RejectsDisconnectedGraph) {
  EXPECT_THROW(metropolis(Topology::from_edges(3, {{0, 1}})), InvalidTopology);
}

TEST(Laplacian, RingOfFourAtOneThirdMatchesMetropolis) {
  const Topology t = build_ring(4);
  EXPECT_TRUE(laplacian_weights(t, 1.0 / 3.0).matrix().isApprox(metropolis(t).matrix(), 1e-15));
}

TEST(Laplacian, SingleEdgeAtOneHalf) {
  EXPECT_TRUE(laplacian_weights(build_ring(2), 0.5).matrix().isApprox(Eigen::MatrixXd::Constant(2, 2, 0.5)));
}

TEST(Laplacian, VanishingEpsilonApproachesIdentity) {
  const MixingMatrix w = laplacian_weights(build_ring(6), 1e-6);
  EXPECT_LT((w.matrix() - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_GT(w.contraction(), 1.0 - 1e-5);
  EXPECT_LT(w.contraction(), 1.0);
}

TEST(Laplacian, RejectsEpsilonBreakingNonnegativity) {
  EXPECT_THROW(laplacian_weights(build_ring(4), 0.6), InvalidParameter);
  EXPECT_THROW(laplacian_weights(build_ring(4), 0.0), InvalidParameter);
}

TEST(Laplacian, AgreesWithMetropolisOnRegularRings) {
  for (int d = 3; d <= 20; ++d) {
    const Topology t = build_ring(d);
    EXPECT_TRUE(laplacian_weights(t, 1.0 / 3.0).matrix().isApprox(metropolis(t).matrix(), 1e-15)) << d;
  }
}

TEST(Validate, MetropolisRingOfEightPassesEverything) {
  const Topology t = build_ring(8);
  const MixingReport r = validate(metropolis(t).matrix(), t);
  EXPECT_TRUE(r.all_passed());
  EXPECT_NEAR(r.eigenvalues(r.eigenvalues.size() - 1), 1.0, 1e-12);
}

TEST(Validate, IdentityPassesSparsityButEigenvalueOneIsNotSimple) {
  const MixingReport r = validate(Eigen::MatrixXd::Identity(4, 4), build_ring(4));
  ASSERT_NE(r.find("sparsity"), nullptr);
  EXPECT_TRUE(r.find("sparsity")->passed);
  EXPECT_FALSE(r.find("simple_unit_eigenvalue")->passed);
  EXPECT_DOUBLE_EQ(r.contraction, 1.0);
  EXPECT_FALSE(r.all_passed());
}

TEST(Validate, NegativeEntryFailsNonnegativity) {
  const Topology t = build_ring(4);
  Eigen::MatrixXd w = metropolis(t).matrix();
  w(0, 1) = w(1, 0) = -0.1;
  EXPECT_FALSE(validate(w, t).find("nonnegativity")->passed);
}

TEST(Validate, AsymmetryAndWeightOffGraphAreCaught) {
  const Topology t = build_ring(4);
  Eigen::MatrixXd w = metropolis(t).matrix();
  w(0, 1) += 1e-3;
  EXPECT_FALSE(validate(w, t).find("symmetry")->passed);
  EXPECT_FALSE(validate(w, t).find("row_sums")->passed);

  Eigen::MatrixXd off = metropolis(t).matrix();
  off(0, 2) = off(2, 0) = 0.1;
  off(0, 0) -= 0.1;
  off(2, 2) -= 0.1;
  EXPECT_FALSE(validate(off, t).find("sparsity")->passed);
}

TEST(Validate, NeverThrowsOnWrongShapeOrNan) {
  const Topology t = build_ring(4);
  EXPECT_FALSE(validate(Eigen::MatrixXd::Identity(3, 3), t).all_passed());
  Eigen::MatrixXd w = metropolis(t).matrix();
  w(1, 1) = std::nan("");
  EXPECT_FALSE(validate(w, t).find("finite")->passed);
}

TEST(FromMatrix, ThrowsOnInvalidInput) {
  EXPECT_THROW(MixingMatrix::from_matrix(Eigen::MatrixXd::Identity(4, 4), build_ring(4)), InvalidInput);
}

TEST(ContractionFactor, UniformCompleteIsZero) {
  for (int d = 2; d <= 10; ++d) EXPECT_NEAR(contraction_factor(Eigen::MatrixXd::Constant(d, d, 1.0 / d)), 0.0, 1e-12);
}

TEST(BuilderProperties, StochasticityAndProjectionIdentity) {
  std::vector<Topology> graphs;
  for (int d = 2; d <= 24; ++d) {
    graphs.push_back(build_ring(d));
    graphs.push_back(build_complete(d));
    graphs.push_back(build_random_connected(d, 0.2, 17 * d));
  }
  for (const Topology& t : graphs) {
    const int d = t.num_agents();
    const ProjectionPair pp = ProjectionPair::make(d);
    for (const MixingMatrix& mm : {metropolis(t), laplacian_weights(t, 1.0 / (1.0 + t.max_degree()))}) {
      const Eigen::MatrixXd& w = mm.matrix();
      const Eigen::VectorXd e = Eigen::VectorXd::Ones(d);
      EXPECT_LE((w * e - e).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((e.transpose() * w - e.transpose()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LE((pp.P_perp * w * pp.P_perp - w * pp.P_perp).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT(mm.contraction(), 1.0);
    }
  }
}

TEST(Csv, RoundTripsBitwise) {
  const Eigen::MatrixXd w = metropolis(build_random_connected(7, 0.3, 2)).matrix();
  const Eigen::MatrixXd back = matrix_from_csv(to_csv(w));
  ASSERT_EQ(back.rows(), 7);
  EXPECT_EQ(back, w);
}

}  // namespace
}  // namespace dsm
