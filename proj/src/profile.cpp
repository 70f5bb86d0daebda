#include "thinslip/profile.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "thinslip/errors.hpp"

namespace thinslip {

double slip_coefficient(const Vec2& B, const Mat2& K, double s, double delta) {
  if (s == 2.0) return 1.0;
  const double r2 = (K * B).squaredNorm() + delta * delta;
  if (r2 == 0.0) return 0.0;  // odd extension at the origin; T(0) = 0
  return std::pow(r2, 0.5 * (s - 2.0));
}

Vec2 slip_traction(const Vec2& B, const Mat2& K, double s, double delta) {
  const Vec2 KKB = K * (K * B);
  if (KKB.isZero(0.0)) return Vec2::Zero();
  return slip_coefficient(B, K, s, delta) * KKB;
}

Vec2 slip_traction(const Vec2& B, const FluidParams& params, double delta) {
  return slip_traction(B, params.K, params.s, delta);
}

Mat2 slip_traction_jacobian(const Vec2& B, const Mat2& K, double s, double delta) {
  const Mat2 K2 = K * K;
  if (s == 2.0) return K2;
  const double r2 = (K * B).squaredNorm() + delta * delta;
  if (r2 == 0.0) {
    throw ParameterError("traction Jacobian is singular at B = 0 with delta = 0");
  }
  const Vec2 KKB = K2 * B;
  return std::pow(r2, 0.5 * (s - 2.0)) * K2 +
         (s - 2.0) * std::pow(r2, 0.5 * (s - 4.0)) * (KKB * KKB.transpose());
}

Vec2 closure_residual(const Vec2& B, const Vec2& G, double h, const FluidParams& params,
                      double delta) {
  return B + (h / params.nu) * slip_traction(B, params, delta) -
         G * (h * h / (2.0 * params.nu));
}

Mat2 closure_jacobian(const Vec2& B, double h, const FluidParams& params, double delta) {
  return Mat2::Identity() + (h / params.nu) * slip_traction_jacobian(B, params.K, params.s, delta);
}

double default_delta(const Vec2& G, double h, double nu) {
  const double v = G.norm() * h * h / (2.0 * nu);
  return 1e-6 * (v > 0.0 ? v : 1.0);
}

namespace {

void finish(ProfileSolution& sol) {
  const double h = sol.h, nu = sol.nu;
  sol.flux = -sol.G * (h * h * h / (6.0 * nu)) + sol.A * (h * h / 2.0) + sol.B * h;
}

}  // namespace

ProfileSolution solve_profile(const Vec2& G, double h, const FluidParams& params,
                              Regime regime, std::optional<double> delta) {
  if (!(h > 0.0)) throw ParameterError("gap h must be > 0");
  const double nu = params.nu;
  ProfileSolution sol;
  sol.G = G;
  sol.h = h;
  sol.nu = nu;
  const Vec2 slip_free = G * (h * h / (2.0 * nu));

  switch (regime.kind) {
    case RegimeKind::Subcritical:
      sol.A = G * (h / (2.0 * nu));
      finish(sol);
      return sol;
    case RegimeKind::Supercritical:
      sol.B = slip_free;
      finish(sol);
      return sol;
    case RegimeKind::Critical:
      break;
  }

  const double d = delta ? *delta : (params.delta_reg ? *params.delta_reg : default_delta(G, h, nu));
  const double tol = 1e-12 * std::max(1.0, slip_free.norm());

  // The closure is strictly monotone, so the root lies between the no-slip
  // (B = 0) and the free-slip (B = G h^2 / 2 nu) answers; start from the latter.
  Vec2 B = slip_free;
  Vec2 R = closure_residual(B, G, h, params, d);
  double rnorm = R.norm();
  std::vector<double> history{rnorm};
  int it = 0;
  while (rnorm > tol) {
    if (it == kNewtonMaxIters) {
      std::ostringstream os;
      os << "profile Newton did not converge in " << kNewtonMaxIters
         << " iterations, residual " << rnorm;
      throw SolverError(os.str(), history);
    }
    const Vec2 step = -closure_jacobian(B, h, params, d).ldlt().solve(R);
    double lambda = 1.0;
    Vec2 trial = B + step;
    Vec2 Rt = closure_residual(trial, G, h, params, d);
    // Armijo backtracking on the residual norm.
    for (int k = 0; k < 60 && Rt.norm() > (1.0 - 1e-4 * lambda) * rnorm; ++k) {
      lambda *= 0.5;
      trial = B + lambda * step;
      Rt = closure_residual(trial, G, h, params, d);
    }
    B = trial;
    R = Rt;
    rnorm = R.norm();
    history.push_back(rnorm);
    ++it;
  }
  sol.B = B;
  sol.A = slip_traction(B, params, d) / nu;
  sol.newton_iters = it;
  sol.residual = rnorm;
  finish(sol);
  return sol;
}

Mat2 frozen_mobility(double c, double h, const FluidParams& params) {
  const double nu = params.nu;
  const Mat2 M = Mat2::Identity() + (h * c / nu) * (params.K * params.K);
  return (h * h * h / (12.0 * nu)) * (Mat2::Identity() + 3.0 * M.inverse());
}

}  // namespace thinslip
