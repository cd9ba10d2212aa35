#include "dsm/algorithm.hpp"

#include <cmath>

#include "dsm/error.hpp"
#include "dsm/format.hpp"
#include "dsm/oracle.hpp"

namespace dsm {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::DSGD: return "dsgd";
    case Variant::DGSGDm: return "dgsgdm";
    case Variant::DSGD_T: return "dsgd_t";
  }
  return "unknown";
}

std::string to_string(Phi phi) { return phi == Phi::HalfSqNorm ? "half_sq_norm" : "l1_norm"; }

Variant variant_from_string(const std::string& s) {
  if (s == "dsgd") return Variant::DSGD;
  if (s == "dgsgdm" || s == "dsgdm" || s == "dsignsgd") return Variant::DGSGDm;
  if (s == "dsgd_t") return Variant::DSGD_T;
  throw InvalidParameter("unknown algorithm variant '" + s + "'");
}

Phi phi_from_string(const std::string& s) {
  if (s == "half_sq_norm") return Phi::HalfSqNorm;
  if (s == "l1_norm") return Phi::L1Norm;
  throw InvalidParameter("unknown auxiliary function '" + s + "'");
}

void AlgorithmConfig::validate(double eta0) const {
  if (variant != Variant::DGSGDm) return;
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidParameter("tau must be positive, got " + format_double(tau));
  if (tau * eta0 > 1.0) {
    throw InvalidParameter("tau * eta0 = " + format_double(tau * eta0) + " exceeds 1");
  }
}

std::string AlgorithmConfig::label() const {
  if (variant == Variant::DGSGDm) return phi == Phi::HalfSqNorm ? "dsgdm" : "dsignsgd";
  return to_string(variant);
}

double phi_value(Phi phi, const Eigen::VectorXd& y) {
  return phi == Phi::HalfSqNorm ? 0.5 * y.squaredNorm() : y.lpNorm<1>();
}

Eigen::MatrixXd phi_select(Phi phi, const Eigen::MatrixXd& y) {
  if (phi == Phi::HalfSqNorm) return y;
  Eigen::MatrixXd out(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.cols(); ++i) out.col(i) = sign_map_select(y.col(i));
  return out;
}

}  // namespace dsm
