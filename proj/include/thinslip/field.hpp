#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "thinslip/geometry.hpp"

namespace thinslip {

enum class FieldKind { VelocityFull, PressureFull, VelocityReduced, PressureReduced };

bool is_velocity(FieldKind kind);

using Vec3 = std::array<double, 3>;
using VelocityFn = std::function<Vec3(double, double, double)>;

/// Discrete unknowns on a Grid3. Velocity kinds use the full staggered
/// layout of Grid3 plus a bottom trace (tangential components at z3 = 0);
/// PressureFull holds one value per 3D cell, PressureReduced one value per
/// cell of omega.
struct Field {
  FieldKind kind = FieldKind::PressureFull;
  std::shared_ptr<const Grid3> grid;
  std::vector<double> values;
  std::vector<double> trace;
  bool zero_mean = false;

  static Field zeros(FieldKind kind, std::shared_ptr<const Grid3> grid);
  /// Samples fn at every staggered location; the trace samples z3 = 0.
  static Field sample_velocity(FieldKind kind, std::shared_ptr<const Grid3> grid,
                               const VelocityFn& fn);
  static Field sample_pressure(FieldKind kind, std::shared_ptr<const Grid3> grid,
                               const std::function<double(double, double, double)>& fn);

  bool velocity() const { return is_velocity(kind); }
  /// Quadrature weight of each value (midpoint rule on cells, trapezoidal
  /// half weights on boundary faces).
  std::vector<double> weights() const;
  /// Quadrature weight of each trace value (bottom-face measure dz').
  std::vector<double> trace_weights() const;
};

/// Velocity location of a full-layout entry: component and coordinates.
struct Location {
  int component;
  double z1, z2, z3;
};
Location velocity_location(const Grid3& grid, int index);

}  // namespace thinslip
