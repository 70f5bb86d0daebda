#pragma once

#include <optional>

#include "thinslip/params.hpp"

namespace thinslip {

/// Vertical profile u'(z3) = -G z3^2 / (2 nu) + A z3 + B of one column with
/// no-slip at z3 = h and the regime's closure at z3 = 0.
struct ProfileSolution {
  Vec2 A = Vec2::Zero();
  Vec2 B = Vec2::Zero();
  Vec2 G = Vec2::Zero();
  double h = 0.0;
  double nu = 1.0;
  Vec2 flux = Vec2::Zero();
  int newton_iters = 0;
  double residual = 0.0;

  Vec2 velocity(double z3) const { return -G * (z3 * z3 / (2.0 * nu)) + A * z3 + B; }
  Vec2 shear(double z3) const { return -G * (z3 / nu) + A; }
};

/// Regularized power-law traction |K B|_delta^{s-2} K^2 B with
/// |x|_delta = sqrt(|x|^2 + delta^2).
Vec2 slip_traction(const Vec2& B, const Mat2& K, double s, double delta);
Vec2 slip_traction(const Vec2& B, const FluidParams& params, double delta);

/// Scalar friction factor |K B|_delta^{s-2}.
double slip_coefficient(const Vec2& B, const Mat2& K, double s, double delta);

/// Jacobian of slip_traction with respect to B.
Mat2 slip_traction_jacobian(const Vec2& B, const Mat2& K, double s, double delta);

/// Critical closure residual B + (h/nu) T(B) - G h^2 / (2 nu) and its Jacobian.
Vec2 closure_residual(const Vec2& B, const Vec2& G, double h, const FluidParams& params,
                      double delta);
Mat2 closure_jacobian(const Vec2& B, double h, const FluidParams& params, double delta);

/// Default regularization: 1e-6 times the characteristic velocity
/// |G| h^2 / (2 nu), or 1e-6 when G = 0.
double default_delta(const Vec2& G, double h, double nu);

inline constexpr int kNewtonMaxIters = 100;

/// Solves one column. Sub/supercritical closures are closed forms; the
/// critical closure is solved by damped Newton. `delta` overrides both
/// params.delta_reg and the default.
ProfileSolution solve_profile(const Vec2& G, double h, const FluidParams& params,
                              Regime regime, std::optional<double> delta = std::nullopt);

/// Linear mobility tensor of a column whose friction factor is frozen at c:
/// flux = M G with M = h^3/(12 nu) (I + 3 (I + (h c / nu) K^2)^-1).
Mat2 frozen_mobility(double c, double h, const FluidParams& params);

}  // namespace thinslip
