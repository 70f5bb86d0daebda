#pragma once

#include <memory>
#include <vector>

#include "thinslip/field.hpp"
#include "thinslip/problem.hpp"
#include "thinslip/profile.hpp"

namespace thinslip {

struct FullOptions {
  bool convection = false;
  /// One-sided wall derivative: 1 (two-point) or 2 (three-point).
  int robin_order = 2;
  double outer_tol = 1e-10;
  int max_outer = 200;
};

/// Terms of the discrete energy balance  viscous + boundary = work.
struct EnergyBalance {
  double viscous = 0.0;
  double boundary = 0.0;
  double work = 0.0;
  double mismatch = 0.0;  // |viscous + boundary - work| / |work|
};

struct FullOrderSolution {
  FluidParams params;
  FullOptions options;
  double eps = 1.0;
  /// Regularization of the limit-scale closure; the wall law itself is
  /// regularized with eps^2 * delta.
  double delta = 0.0;
  Field velocity;
  Field pressure;
  /// Forcing sampled on the velocity layout.
  Field forcing;
  int outer_iters = 0;
  std::vector<double> outer_history;
  /// Krylov iterations of each outer step (0 when the factorization sufficed).
  std::vector<int> linear_iters;
  double saddle_residual = 0.0;
  double max_divergence = 0.0;
  /// Frozen eps^{gamma-1} |K u'|_delta^{s-2} per bottom cell (nx * ny).
  std::vector<double> boundary_coeff;
  /// Rescaled wall shear nu eps^-2 d3 u' per trace entry (the one-sided
  /// stencil of the wall rows).
  std::vector<double> wall_shear;
  EnergyBalance energy;
};

/// Rescaled finite-eps problem on a flat grid. Outer Picard loop on the wall
/// coefficient (and the convective velocity when enabled); each inner step
/// is a sparse direct saddle-point solve.
FullOrderSolution solve_full(std::shared_ptr<const Grid3> grid, const VectorFn& forcing,
                             const FluidParams& params, const FullOptions& options = {});

/// Single linear solve with the velocity-independent s = 2 wall coefficient.
FullOrderSolution solve_full_linear(std::shared_ptr<const Grid3> grid, const VectorFn& forcing,
                                    const FluidParams& params, int robin_order = 2);

/// Recomputes the energy balance of a solved state from its fields.
EnergyBalance boundary_term_energy(const FullOrderSolution& sol, const FluidParams& params);

/// Bottom-cell average of the tangential trace (nx * ny entries).
std::vector<Vec2> trace_cell_average(const Grid3& grid, const std::vector<double>& trace);

/// Assembled wall operator on traces: the gradient of
/// sum_cells |cell| eps^{gamma-1} |K v_c|_d^s / s with v_c the cell average
/// and d = eps^2 delta.
std::vector<double> boundary_operator(const Grid3& grid, const FluidParams& params,
                                      double delta, const std::vector<double>& trace);

}  // namespace thinslip
