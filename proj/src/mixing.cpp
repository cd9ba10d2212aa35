#include "dsm/mixing.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "dsm/error.hpp"
#include "dsm/format.hpp"

namespace dsm {

ProjectionPair ProjectionPair::make(int d) {
  ProjectionPair pp;
  pp.P = Eigen::MatrixXd::Constant(d, d, 1.0 / d);
  pp.P_perp = Eigen::MatrixXd::Identity(d, d) - pp.P;
  return pp;
}

bool MixingReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const MixingCheck& c) { return c.passed; });
}

const MixingCheck* MixingReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

double contraction_factor(const Eigen::MatrixXd& w) {
  const auto d = w.rows();
  const Eigen::MatrixXd p_perp =
      Eigen::MatrixXd::Identity(d, d) - Eigen::MatrixXd::Constant(d, d, 1.0 / static_cast<double>(d));
  const Eigen::MatrixXd m = w * p_perp;
  // Spectral norm through singular values, so asymmetric candidates are
  // handled too.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return d == 0 ? 0.0 : svd.singularValues()(0);
}

MixingReport validate(const Eigen::MatrixXd& w, const Topology& t) {
  MixingReport report;
  const int d = t.num_agents();
  auto add = [&](std::string name, bool ok, std::string detail = {}) {
    report.checks.push_back({std::move(name), ok, std::move(detail)});
  };

  if (w.rows() != d || w.cols() != d) {
    add("shape", false,
        "expected " + std::to_string(d) + "x" + std::to_string(d) + ", got " +
            std::to_string(w.rows()) + "x" + std::to_string(w.cols()));
    return report;
  }
  if (!w.allFinite()) {
    add("finite", false, "matrix has non-finite entries");
    return report;
  }

  bool symmetric = true;
  for (int i = 0; i < d && symmetric; ++i)
    for (int j = i + 1; j < d; ++j)
      if (w(i, j) != w(j, i)) {
        symmetric = false;
        add("symmetry", false, "W(" + std::to_string(i) + "," + std::to_string(j) + ") != W(" +
                                   std::to_string(j) + "," + std::to_string(i) + ")");
        break;
      }
  if (symmetric) add("symmetry", true);

  const double min_entry = w.minCoeff();
  add("nonnegativity", min_entry >= 0.0, "min entry " + format_double(min_entry));

  const double row_dev = (w.rowwise().sum().array() - 1.0).abs().maxCoeff();
  const double col_dev = (w.colwise().sum().array() - 1.0).abs().maxCoeff();
  add("row_sums", row_dev <= kStochasticTol, "max |row sum - 1| = " + format_double(row_dev));
  add("column_sums", col_dev <= kStochasticTol, "max |col sum - 1| = " + format_double(col_dev));

  bool zero_off_graph = true;
  bool positive_on_graph = true;
  std::string off_detail, on_detail;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const bool allowed = i == j || t.has_edge(i, j);
      if (!allowed && w(i, j) != 0.0 && zero_off_graph) {
        zero_off_graph = false;
        off_detail = "nonzero weight on non-edge (" + std::to_string(i) + "," + std::to_string(j) + ")";
      }
      if (allowed && !(w(i, j) > 0.0) && positive_on_graph) {
        positive_on_graph = false;
        on_detail = "zero weight on edge or diagonal (" + std::to_string(i) + "," + std::to_string(j) + ")";
      }
    }
  }
  add("sparsity", zero_off_graph, off_detail);
  add("edge_support", positive_on_graph, on_detail);

  const Eigen::MatrixXd sym = 0.5 * (w + w.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  report.eigenvalues = eig.eigenvalues();
  const double lo = report.eigenvalues(0);
  const double hi = report.eigenvalues(d - 1);
  add("spectrum", lo > -1.0 + kStochasticTol && hi <= 1.0 + kStochasticTol,
      "eigenvalues in [" + format_double(lo) + ", " + format_double(hi) + "]");

  report.contraction = contraction_factor(w);
  const Eigen::VectorXd e = Eigen::VectorXd::Constant(d, 1.0 / d);
  const double eigvec_dev = (w * e - e).cwiseAbs().maxCoeff();
  const bool simple = report.contraction < 1.0 - kStochasticTol;
  add("simple_unit_eigenvalue", simple && eigvec_dev <= kStochasticTol,
      "contraction " + format_double(report.contraction) + ", |We - e|_inf = " + format_double(eigvec_dev));
  return report;
}

MixingMatrix MixingMatrix::from_matrix(Eigen::MatrixXd w, const Topology& t) {
  const MixingReport report = validate(w, t);
  if (!report.all_passed()) {
    std::string msg = "invalid mixing matrix:";
    for (const auto& c : report.checks)
      if (!c.passed) msg += " [" + c.name + (c.detail.empty() ? "" : ": " + c.detail) + "]";
    throw InvalidInput(msg);
  }
  return MixingMatrix(std::move(w), report.contraction);
}

namespace {

void require_connected(const Topology& t) {
  if (!is_connected(t)) throw InvalidTopology("mixing matrix requires a connected topology");
}

}  // namespace

MixingMatrix metropolis(const Topology& t) {
  require_connected(t);
  const int d = t.num_agents();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
  for (const auto& [i, j] : t.edges()) {
    const double wij = 1.0 / (1.0 + std::max(t.degree(i), t.degree(j)));
    w(i, j) = wij;
    w(j, i) = wij;
  }
  for (int i = 0; i < d; ++i) {
    double off = 0.0;
    for (int j : t.neighbors(i)) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  return MixingMatrix::from_matrix(std::move(w), t);
}

MixingMatrix laplacian_weights(const Topology& t, double epsilon) {
  require_connected(t);
  const int dmax = t.max_degree();
  if (!(epsilon > 0.0) || (dmax > 0 && !(epsilon * dmax < 1.0))) {
    throw InvalidParameter("laplacian epsilon must satisfy 0 < epsilon < 1/deg_max = 1/" +
                           std::to_string(dmax) + ", got " + format_double(epsilon));
  }
  const int d = t.num_agents();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
  for (const auto& [i, j] : t.edges()) {
    w(i, j) = epsilon;
    w(j, i) = epsilon;
  }
  for (int i = 0; i < d; ++i) w(i, i) = 1.0 - epsilon * t.degree(i);
  return MixingMatrix::from_matrix(std::move(w), t);
}

std::string to_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

Eigen::MatrixXd matrix_from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(parse_double(cell));
    if (!rows.empty() && row.size() != rows.front().size()) throw InvalidInput("ragged CSV matrix");
    rows.push_back(std::move(row));
  }
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r ? static_cast<Eigen::Index>(rows.front().size()) : 0;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace dsm
