#include "thinslip/params.hpp"

#include <cmath>
#include <sstream>

#include "thinslip/errors.hpp"

namespace thinslip {

std::string_view to_string(RegimeKind kind) {
  switch (kind) {
    case RegimeKind::Critical:
      return "critical";
    case RegimeKind::Supercritical:
      return "supercritical";
    case RegimeKind::Subcritical:
      return "subcritical";
  }
  return "unknown";
}

Regime classify_regime(double s, double gamma) {
  if (!(s > 1.0 && s <= 2.0)) {
    std::ostringstream os;
    os << "flow index s must lie in (1, 2], got " << s;
    throw ParameterError(os.str());
  }
  if (!std::isfinite(gamma)) throw ParameterError("gamma must be finite");
  // 3 - 2s is exact for every binary s in (1, 2]: 2s is exact and the
  // subtraction of two numbers within a factor of 2 is exact (Sterbenz).
  const double gamma_star = 3.0 - 2.0 * s;
  RegimeKind kind = RegimeKind::Critical;
  if (gamma > gamma_star) kind = RegimeKind::Supercritical;
  if (gamma < gamma_star) kind = RegimeKind::Subcritical;
  return {kind, gamma_star};
}

void FluidParams::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ParameterError("nu must be > 0");
  if (!(s >= kMinFlowIndex && s <= 2.0)) {
    std::ostringstream os;
    os << "flow index s must lie in [" << kMinFlowIndex << ", 2], got " << s;
    throw ParameterError(os.str());
  }
  if (!std::isfinite(gamma)) throw ParameterError("gamma must be finite");
  if (!K.allFinite()) throw ParameterError("K must be finite");
  const double scale = K.cwiseAbs().maxCoeff();
  if (std::abs(K(0, 1) - K(1, 0)) > 1e-14 * scale) {
    throw ParameterError("K must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat2> eig(K);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw ParameterError("K must be positive definite");
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError("eps must be > 0");
  if (delta_reg) {
    if (!(*delta_reg >= 0.0) || !std::isfinite(*delta_reg)) {
      throw ParameterError("delta_reg must be >= 0");
    }
    if (*delta_reg == 0.0 && !navier_mode()) {
      throw ParameterError("delta_reg = 0 is only allowed for s = 2");
    }
  }
}

Mat2 navier_tensor(double lambda) {
  if (!(lambda > 0.0)) throw ParameterError("friction coefficient must be > 0");
  return std::sqrt(lambda) * Mat2::Identity();
}

}  // namespace thinslip
