#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsm/graph.hpp"

namespace dsm {

inline constexpr double kStochasticTol = 1e-12;

/// P = e 1^T with e = (1/d) 1, and its complement I - P.
struct ProjectionPair {
  Eigen::MatrixXd P;
  Eigen::MatrixXd P_perp;

  static ProjectionPair make(int d);
};

struct MixingCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct MixingReport {
  std::vector<MixingCheck> checks;
  Eigen::VectorXd eigenvalues;  // ascending
  double contraction = 1.0;

  bool all_passed() const;
  const MixingCheck* find(const std::string& name) const;
};

/// Checks a candidate matrix against the mixing-matrix definition for the
/// given graph. Never throws; a dimension mismatch yields a failed "shape"
/// check and nothing else.
///
/// "sparsity" is the support condition W(i,j) = 0 off the graph;
/// "edge_support" is the converse (W(i,j) > 0 on every edge and diagonal).
MixingReport validate(const Eigen::MatrixXd& w, const Topology& t);

/// Spectral norm of W (I - P). For a valid W this is the largest modulus
/// among non-principal eigenvalues.
double contraction_factor(const Eigen::MatrixXd& w);

class MixingMatrix {
 public:
  /// Validates against t; throws InvalidInput listing the failed checks.
  static MixingMatrix from_matrix(Eigen::MatrixXd w, const Topology& t);

  int size() const noexcept { return static_cast<int>(w_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return w_; }
  double operator()(int i, int j) const { return w_(i, j); }
  double contraction() const noexcept { return contraction_; }

 private:
  MixingMatrix(Eigen::MatrixXd w, double contraction) : w_(std::move(w)), contraction_(contraction) {}

  Eigen::MatrixXd w_;
  double contraction_;
};

inline double contraction_factor(const MixingMatrix& w) { return w.contraction(); }

/// W(i,j) = 1 / (1 + max(deg_i, deg_j)) on edges, diagonal fills rows to 1.
MixingMatrix metropolis(const Topology& t);

/// W = I - epsilon L, L the combinatorial Laplacian; needs 0 < epsilon < 1/deg_max.
MixingMatrix laplacian_weights(const Topology& t, double epsilon);

/// Row-major CSV, one row per line, shortest round-trip decimal.
std::string to_csv(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_csv(const std::string& text);

}  // namespace dsm
