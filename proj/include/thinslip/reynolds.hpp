#pragma once

#include <memory>
#include <vector>

#include "thinslip/field.hpp"
#include "thinslip/profile.hpp"

namespace thinslip {

struct LimitOptions {
  double picard_tol = 1e-10;
  int max_picard = 500;
  double relax = 0.7;
};

/// Effective (limit) solution: zero-mean pressure on omega, the
/// profile-reconstructed velocity on Omega and the column fluxes.
struct LimitSolution {
  FluidParams params;
  Regime regime{RegimeKind::Critical, 0.0};
  double delta = 0.0;
  Field pressure;  // PressureReduced
  Field velocity;  // VelocityReduced, u3 = 0
  /// Column flux vectors on x-faces ((nx + 1) * ny) and y-faces
  /// (nx * (ny + 1), empty in dim 1). Boundary faces carry zero flux.
  std::vector<Vec2> xface_flux, yface_flux;
  int picard_iters = 0;
  /// Max cell divergence of the nonlinear flux at each Picard iterate.
  std::vector<double> picard_history;
  /// Max |div flux| over cells at the returned pressure.
  double flux_div_residual = 0.0;
};

/// Solves div(q(f' - grad p)) = 0 with zero normal flux, q the column flux
/// of the profile closure of the regime classify_regime(s, gamma).
LimitSolution solve_limit(std::shared_ptr<const Grid3> grid, const VectorFn& forcing,
                          const FluidParams& params, const LimitOptions& options = {});

/// Driving vector G = f' - grad p on every x- and y-face (boundary faces
/// use one-sided tangential differences; their normal component is unused).
void face_drives(const Field& pressure, const VectorFn& forcing, std::vector<Vec2>& xface,
                 std::vector<Vec2>& yface);

/// Evaluates the column profiles of the given pressure on the velocity
/// layout of its grid; u3 = 0, the trace holds the slip velocity B.
Field reconstruct_velocity(const Field& pressure, const VectorFn& forcing,
                           const FluidParams& params, double delta);

}  // namespace thinslip
