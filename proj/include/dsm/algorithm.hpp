#pragma once

#include <string>

#include <Eigen/Dense>

namespace dsm {

enum class Variant { DSGD, DGSGDm, DSGD_T };

/// Auxiliary function of the momentum method: 0.5 ||y||^2 gives DSGDm,
/// ||y||_1 gives DSignSGD.
enum class Phi { HalfSqNorm, L1Norm };

std::string to_string(Variant v);
std::string to_string(Phi phi);
Variant variant_from_string(const std::string& s);
Phi phi_from_string(const std::string& s);

struct AlgorithmConfig {
  Variant variant = Variant::DSGD;
  Phi phi = Phi::HalfSqNorm;  // DGSGDm only
  double tau = 0.5;           // DGSGDm only

  /// Throws InvalidParameter unless tau > 0 and tau * eta0 <= 1 (DGSGDm).
  void validate(double eta0) const;

  /// Human label: dsgd, dsgdm, dsignsgd, dsgd_t.
  std::string label() const;
};

double phi_value(Phi phi, const Eigen::VectorXd& y);

/// Columnwise selection from the subdifferential of phi: y itself, or the
/// sign map (0 at 0).
Eigen::MatrixXd phi_select(Phi phi, const Eigen::MatrixXd& y);

}  // namespace dsm
