#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Dense>

namespace thinslip {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

enum class RegimeKind { Critical, Supercritical, Subcritical };

std::string_view to_string(RegimeKind kind);

struct Regime {
  RegimeKind kind;
  double gamma_star;  // 3 - 2s
};

/// Critical exponent gamma* = 3 - 2s and the exact comparison of gamma
/// against it. Requires 1 < s <= 2.
Regime classify_regime(double s, double gamma);

/// Smallest flow index accepted by the solvers. The wall law degenerates
/// toward a set-valued friction law as s -> 1.
inline constexpr double kMinFlowIndex = 1.05;

struct FluidParams {
  double nu = 1.0;
  double s = 1.5;
  double gamma = 0.0;
  /// Anisotropy tensor. In reduced dimension 1 only K(0,0) acts on the
  /// single tangential component.
  Mat2 K = Mat2::Identity();
  double eps = 1.0;
  /// Regularization length of |x| -> sqrt(|x|^2 + delta^2). Unset means
  /// "derive from the characteristic velocity of the problem".
  std::optional<double> delta_reg;

  /// s = 2 is the linear Navier-slip compatibility mode.
  bool navier_mode() const { return s == 2.0; }

  /// Throws ParameterError on the first violated invariant.
  void validate() const;

  Regime regime() const { return classify_regime(s, gamma); }
};

/// Isotropic tensor sqrt(lambda) I, the Navier-slip special case.
Mat2 navier_tensor(double lambda);

}  // namespace thinslip
