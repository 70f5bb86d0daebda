#pragma once

#include <functional>
#include <string>
#include <vector>

#include "thinslip/params.hpp"

namespace thinslip {

/// Reduced domain omega: the interval (0, lx) for dim = 1 or the rectangle
/// (0, lx) x (0, ly) for dim = 2, split into nx x ny uniform cells. In
/// dim = 1, ny is 1 and the second coordinate is pinned to 0.
struct ReducedDomain {
  int dim = 2;
  double lx = 1.0;
  double ly = 1.0;
  int nx = 16;
  int ny = 16;

  static ReducedDomain interval(double lx, int nx);
  static ReducedDomain rectangle(double lx, double ly, int nx, int ny);

  void validate() const;
  double dx() const { return lx / nx; }
  double dy() const { return dim == 2 ? ly / ny : 1.0; }
  double cell_area() const { return dx() * dy(); }
  double area() const { return dim == 2 ? lx * ly : lx; }
  int num_cells() const { return nx * ny; }
  int cell(int i, int j) const { return j * nx + i; }
  double xc(int i) const { return (i + 0.5) * dx(); }
  double yc(int j) const { return dim == 2 ? (j + 0.5) * dy() : 0.0; }
  double xf(int i) const { return i * dx(); }
  double yf(int j) const { return dim == 2 ? j * dy() : 0.0; }
  bool operator==(const ReducedDomain&) const = default;
};

/// Named closed-form expression selected by key plus coefficient list.
struct Preset {
  std::string key;
  std::vector<double> coeffs;
};

using ScalarFn = std::function<double(double, double)>;
using VectorFn = std::function<Vec2(double, double)>;

/// Height presets: "constant" [h0], "affine" [a, b1, b2] (a + b1 z1 + b2 z2),
/// "bump" [h0, amp] (h0 + amp sin(pi z1/lx) sin(pi z2/ly)).
ScalarFn make_height(const Preset& preset, const ReducedDomain& domain);

/// Forcing presets: "zero" [], "constant" [f1, f2],
/// "rotational" [amp] (amp (-(z2 - ly/2), z1 - lx/2)),
/// "trig_gradient" [amp] (amp grad(sin(pi z1/lx) sin(pi z2/ly))).
/// In dim = 1 the expressions are evaluated on the line z2 = 0 and the
/// trigonometric profiles drop their z2 factor.
VectorFn make_forcing(const Preset& preset, const ReducedDomain& domain);

/// Gap function sampled at cell centers, with face averages.
class HeightField {
 public:
  HeightField() = default;
  HeightField(ReducedDomain domain, const ScalarFn& h);
  static HeightField constant(ReducedDomain domain, double h0);

  const ReducedDomain& domain() const { return domain_; }
  const std::vector<double>& cells() const { return cells_; }
  /// Faces normal to z1: (nx + 1) x ny, index j * (nx + 1) + i.
  const std::vector<double>& xfaces() const { return xfaces_; }
  /// Faces normal to z2: nx x (ny + 1), index j * nx + i. Empty for dim = 1.
  const std::vector<double>& yfaces() const { return yfaces_; }
  double cell(int i, int j) const { return cells_[domain_.cell(i, j)]; }
  double xface(int i, int j) const { return xfaces_[j * (domain_.nx + 1) + i]; }
  double yface(int i, int j) const { return yfaces_[j * domain_.nx + i]; }
  double min() const;
  double max() const;
  bool is_constant() const;

 private:
  void derive_faces();
  ReducedDomain domain_;
  std::vector<double> cells_, xfaces_, yfaces_;
};

/// Staggered grid over Omega = {z' in omega, 0 < z3 < h(z')}: nz vertical
/// cells per column, velocity components on faces, pressure at cell
/// centers. The full velocity layout stores every face, boundary faces
/// included; the interior degrees of freedom are the faces not fixed to
/// zero by the wall conditions.
class Grid3 {
 public:
  Grid3() = default;
  Grid3(HeightField hf, int nz);

  const HeightField& height() const { return hf_; }
  const ReducedDomain& domain() const { return hf_.domain(); }
  int dim() const { return domain().dim; }
  int nx() const { return domain().nx; }
  int ny() const { return domain().ny; }
  int nz() const { return nz_; }
  bool flat() const { return flat_; }
  /// Vertical spacing for flat grids.
  double dz() const { return hf_.cells()[0] / nz_; }
  double dx() const { return domain().dx(); }
  double dy() const { return domain().dy(); }
  double cell_volume() const { return dx() * dy() * dz(); }

  // Full velocity layout: [u1 | u2 (dim 2) | u3].
  int n_u1() const { return (nx() + 1) * ny() * nz_; }
  int n_u2() const { return dim() == 2 ? nx() * (ny() + 1) * nz_ : 0; }
  int n_u3() const { return nx() * ny() * (nz_ + 1); }
  int n_velocity() const { return n_u1() + n_u2() + n_u3(); }
  int off_u2() const { return n_u1(); }
  int off_u3() const { return n_u1() + n_u2(); }
  int u1(int i, int j, int k) const { return (k * ny() + j) * (nx() + 1) + i; }
  int u2(int i, int j, int k) const { return off_u2() + (k * (ny() + 1) + j) * nx() + i; }
  int u3(int i, int j, int k) const { return off_u3() + (k * ny() + j) * nx() + i; }
  int n_cells() const { return nx() * ny() * nz_; }
  int cell(int i, int j, int k) const { return (k * ny() + j) * nx() + i; }

  // Bottom trace layout: [u1 on x-face bottoms | u2 on y-face bottoms].
  int n_trace() const {
    return (nx() + 1) * ny() + (dim() == 2 ? nx() * (ny() + 1) : 0);
  }
  int t1(int i, int j) const { return j * (nx() + 1) + i; }
  int t2(int i, int j) const { return (nx() + 1) * ny() + j * nx() + i; }

  /// Vertical coordinate of layer k (cell-centered) in a column of gap h.
  double zc(int k, double h) const { return (k + 0.5) * h / nz_; }

  /// Interior (unconstrained) velocity entries, ordered as in the full layout.
  const std::vector<int>& interior_dofs() const { return interior_; }
  /// Position of a full-layout entry among the interior dofs, or -1.
  const std::vector<int>& dof_of() const { return dof_of_; }

 private:
  HeightField hf_;
  int nz_ = 0;
  bool flat_ = true;
  std::vector<int> interior_, dof_of_;
};

}  // namespace thinslip
