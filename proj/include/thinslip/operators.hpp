#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "thinslip/field.hpp"

namespace thinslip {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// A linear map from (velocity values, bottom trace) to per-row outputs,
/// stored in CSR form. Column c < n_values addresses values[c]; larger
/// columns address trace[c - n_values]. Each row carries a quadrature weight.
struct LinearStencil {
  int n_values = 0;
  std::vector<int> row_ptr{0};
  std::vector<int> col;
  std::vector<double> coeff;
  std::vector<double> weight;
  /// Tensor stencils: (row, col) index of each component and its row range.
  std::vector<std::pair<int, int>> component;
  std::vector<int> component_begin{0};

  int rows() const { return static_cast<int>(row_ptr.size()) - 1; }
};

/// Stencil of D_eps: entries (i, j) = d_j v_i for j in the reduced
/// directions and eps^-1 d_3 v_i for j = 3, each at its natural staggered
/// location. Wall values are the boundary conditions (zero, or the trace on
/// Gamma0 for the tangential components).
LinearStencil deps_stencil(const Grid3& grid, double eps);

/// Stencil of div_eps, one row per 3D cell.
LinearStencil div_stencil(const Grid3& grid, double eps);

struct TensorComponent {
  int row = 0;
  int col = 0;
  std::vector<double> values;
  std::vector<double> weights;
};

struct TensorField {
  std::vector<TensorComponent> components;
  const TensorComponent& at(int row, int col) const;
  /// Quadrature L2 norm over Omega.
  double l2_norm() const;
};

TensorField apply_Deps(const Field& v, double eps);
Field apply_diveps(const Field& v, double eps);
/// grad_eps p on the interior velocity faces; constrained faces are zero.
Field apply_grad_eps(const Field& p, double eps);

/// div_eps restricted to interior velocity dofs: rows = cells.
SpMat divergence_matrix(const Grid3& grid, double eps);
/// grad_eps on interior velocity dofs: rows = interior dofs, cols = cells.
SpMat gradient_matrix(const Grid3& grid, double eps);
/// D_eps restricted to interior dofs, without the Gamma0 edge entries of the
/// tangential components (those depend on the slip trace). Row weights are
/// written to `weights`.
SpMat deps_matrix(const Grid3& grid, double eps, std::vector<double>* weights);
/// Rows of deps_stencil that deps_matrix keeps.
std::vector<int> deps_matrix_rows(const Grid3& grid, double eps);

enum class Restriction { Omega, Gamma0 };

/// Quadrature L^p norm. For p = 2 velocity components are integrated on
/// their own staggered locations; otherwise they are averaged to cell
/// centers first. Gamma0 uses the bottom trace with measure dz'. K, when
/// given, multiplies the tangential components pointwise (cell-centered).
double norm(const Field& f, double p, Restriction where);
double norm(const Field& f, double p, Restriction where, const Mat2& K);

/// Weighted mean of a pressure field (cell volumes of Omega).
double weighted_mean(const Field& p);
/// Subtracts the weighted mean and sets the zero-mean flag.
Field zero_mean(const Field& p);

}  // namespace thinslip
