#include "thinslip/operators.hpp"

#include <cmath>

#include "thinslip/errors.hpp"
#include "thinslip/kernels.hpp"

namespace thinslip {

namespace {

double half(int i, int n) { return (i == 0 || i == n) ? 0.5 : 1.0; }

class StencilBuilder {
 public:
  explicit StencilBuilder(int n_values) { st_.n_values = n_values; }
  void begin_component(int row, int col) { st_.component.emplace_back(row, col); }
  void end_component() { st_.component_begin.push_back(st_.rows()); }
  void add(int c, double a) {
    st_.col.push_back(c);
    st_.coeff.push_back(a);
  }
  void end_row(double w) {
    st_.weight.push_back(w);
    st_.row_ptr.push_back(static_cast<int>(st_.col.size()));
  }
  LinearStencil take() { return std::move(st_); }

 private:
  LinearStencil st_;
};

void require_flat(const Grid3& g) {
  if (!g.flat()) throw UsageError("operator requires a constant-height grid");
}

void require_eps(double eps) {
  if (!(eps > 0.0)) throw ParameterError("eps must be > 0");
}

}  // namespace

LinearStencil deps_stencil(const Grid3& g, double eps) {
  require_flat(g);
  require_eps(eps);
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();
  const bool two_d = g.dim() == 2;
  const double dx = g.dx(), dy = g.dy(), dz = g.dz();
  const double ez = 1.0 / (eps * dz);
  const int nv = g.n_velocity();
  StencilBuilder b(nv);

  // (1,1): d1 u1 at cell centers.
  b.begin_component(0, 0);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        b.add(g.u1(i + 1, j, k), 1.0 / dx);
        b.add(g.u1(i, j, k), -1.0 / dx);
        b.end_row(dx * dy * dz);
      }
  b.end_component();

  if (two_d) {
    // (1,2): d2 u1 on x-face / y-edge lines.
    b.begin_component(0, 1);
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
          if (j < ny) b.add(g.u1(i, j, k), (j == 0 ? 2.0 : 1.0) / dy);
          if (j > 0) b.add(g.u1(i, j - 1, k), -(j == ny ? 2.0 : 1.0) / dy);
          b.end_row(half(i, nx) * dx * half(j, ny) * dy * dz);
        }
    b.end_component();
  }

  // (1,3): eps^-1 d3 u1; the k = 0 edge uses the slip trace.
  b.begin_component(0, 2);
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        if (k == 0) {
          b.add(g.u1(i, j, 0), 2.0 * ez);
          b.add(nv + g.t1(i, j), -2.0 * ez);
        } else if (k == nz) {
          b.add(g.u1(i, j, nz - 1), -2.0 * ez);
        } else {
          b.add(g.u1(i, j, k), ez);
          b.add(g.u1(i, j, k - 1), -ez);
        }
        b.end_row(half(i, nx) * dx * dy * half(k, nz) * dz);
      }
  b.end_component();

  if (two_d) {
    b.begin_component(1, 0);
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
          if (i < nx) b.add(g.u2(i, j, k), (i == 0 ? 2.0 : 1.0) / dx);
          if (i > 0) b.add(g.u2(i - 1, j, k), -(i == nx ? 2.0 : 1.0) / dx);
          b.end_row(half(i, nx) * dx * half(j, ny) * dy * dz);
        }
    b.end_component();

    b.begin_component(1, 1);
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          b.add(g.u2(i, j + 1, k), 1.0 / dy);
          b.add(g.u2(i, j, k), -1.0 / dy);
          b.end_row(dx * dy * dz);
        }
    b.end_component();

    b.begin_component(1, 2);
    for (int k = 0; k <= nz; ++k)
      for (int j = 0; j <= ny; ++j)
        for (int i = 0; i < nx; ++i) {
          if (k == 0) {
            b.add(g.u2(i, j, 0), 2.0 * ez);
            b.add(nv + g.t2(i, j), -2.0 * ez);
          } else if (k == nz) {
            b.add(g.u2(i, j, nz - 1), -2.0 * ez);
          } else {
            b.add(g.u2(i, j, k), ez);
            b.add(g.u2(i, j, k - 1), -ez);
          }
          b.end_row(dx * half(j, ny) * dy * half(k, nz) * dz);
        }
    b.end_component();
  }

  b.begin_component(2, 0);
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i <= nx; ++i) {
        if (i < nx) b.add(g.u3(i, j, k), (i == 0 ? 2.0 : 1.0) / dx);
        if (i > 0) b.add(g.u3(i - 1, j, k), -(i == nx ? 2.0 : 1.0) / dx);
        b.end_row(half(i, nx) * dx * dy * half(k, nz) * dz);
      }
  b.end_component();

  if (two_d) {
    b.begin_component(2, 1);
    for (int k = 0; k <= nz; ++k)
      for (int j = 0; j <= ny; ++j)
        for (int i = 0; i < nx; ++i) {
          if (j < ny) b.add(g.u3(i, j, k), (j == 0 ? 2.0 : 1.0) / dy);
          if (j > 0) b.add(g.u3(i, j - 1, k), -(j == ny ? 2.0 : 1.0) / dy);
          b.end_row(dx * half(j, ny) * dy * half(k, nz) * dz);
        }
    b.end_component();
  }

  b.begin_component(2, 2);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        b.add(g.u3(i, j, k + 1), ez);
        b.add(g.u3(i, j, k), -ez);
        b.end_row(dx * dy * dz);
      }
  b.end_component();
  return b.take();
}

LinearStencil div_stencil(const Grid3& g, double eps) {
  require_flat(g);
  require_eps(eps);
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();
  const double dx = g.dx(), dy = g.dy(), dz = g.dz();
  const double ez = 1.0 / (eps * dz);
  StencilBuilder b(g.n_velocity());
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        b.add(g.u1(i, j, k), -1.0 / dx);
        b.add(g.u1(i + 1, j, k), 1.0 / dx);
        if (g.dim() == 2) {
          b.add(g.u2(i, j, k), -1.0 / dy);
          b.add(g.u2(i, j + 1, k), 1.0 / dy);
        }
        b.add(g.u3(i, j, k), -ez);
        b.add(g.u3(i, j, k + 1), ez);
        b.end_row(dx * dy * dz);
      }
  return b.take();
}

const TensorComponent& TensorField::at(int row, int col) const {
  for (const auto& c : components)
    if (c.row == row && c.col == col) return c;
  throw UsageError("tensor component not present");
}

double TensorField::l2_norm() const {
  double sum = 0.0;
  for (const auto& c : components)
    sum += kernels::weighted_power_sum_omp(c.values, c.weights, 2.0);
  return std::sqrt(sum);
}

namespace {

void require_velocity(const Field& v) {
  if (!v.velocity() || !v.grid) throw UsageError("expected a velocity field");
}

}  // namespace

TensorField apply_Deps(const Field& v, double eps) {
  require_velocity(v);
  const LinearStencil st = deps_stencil(*v.grid, eps);
  std::vector<double> out(st.rows());
  kernels::apply_stencil_omp(st, v.values, v.trace, out);
  TensorField t;
  for (std::size_t c = 0; c < st.component.size(); ++c) {
    TensorComponent tc;
    tc.row = st.component[c].first;
    tc.col = st.component[c].second;
    tc.values.assign(out.begin() + st.component_begin[c], out.begin() + st.component_begin[c + 1]);
    tc.weights.assign(st.weight.begin() + st.component_begin[c],
                      st.weight.begin() + st.component_begin[c + 1]);
    t.components.push_back(std::move(tc));
  }
  return t;
}

Field apply_diveps(const Field& v, double eps) {
  require_velocity(v);
  const LinearStencil st = div_stencil(*v.grid, eps);
  Field out = Field::zeros(FieldKind::PressureFull, v.grid);
  kernels::apply_stencil_omp(st, v.values, v.trace, out.values);
  return out;
}

Field apply_grad_eps(const Field& p, double eps) {
  if (p.kind != FieldKind::PressureFull) throw UsageError("expected a PressureFull field");
  const Grid3& g = *p.grid;
  const SpMat G = gradient_matrix(g, eps);
  Eigen::Map<const Eigen::VectorXd> pv(p.values.data(), static_cast<Eigen::Index>(p.values.size()));
  const Eigen::VectorXd gv = G * pv;
  Field out = Field::zeros(FieldKind::VelocityFull, p.grid);
  const auto& dofs = g.interior_dofs();
  for (std::size_t d = 0; d < dofs.size(); ++d) out.values[dofs[d]] = gv[static_cast<Eigen::Index>(d)];
  return out;
}

namespace {

SpMat restrict_stencil(const Grid3& g, const LinearStencil& st, const std::vector<int>& rows) {
  const auto& dof_of = g.dof_of();
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int n = st.row_ptr[rows[r]]; n < st.row_ptr[rows[r] + 1]; ++n) {
      const int c = st.col[n];
      if (c >= st.n_values) throw UsageError("restricted stencil row touches the trace");
      const int d = dof_of[c];
      if (d >= 0) trip.emplace_back(static_cast<int>(r), d, st.coeff[n]);
    }
  }
  SpMat m(static_cast<Eigen::Index>(rows.size()),
          static_cast<Eigen::Index>(g.interior_dofs().size()));
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

}  // namespace

SpMat divergence_matrix(const Grid3& g, double eps) {
  const LinearStencil st = div_stencil(g, eps);
  std::vector<int> rows(st.rows());
  for (int r = 0; r < st.rows(); ++r) rows[r] = r;
  return restrict_stencil(g, st, rows);
}

SpMat gradient_matrix(const Grid3& g, double eps) {
  require_flat(g);
  require_eps(eps);
  const double dx = g.dx(), dy = g.dy(), ez = 1.0 / (eps * g.dz());
  const auto& dofs = g.interior_dofs();
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t d = 0; d < dofs.size(); ++d) {
    const int r = static_cast<int>(d);
    const Location loc = velocity_location(g, dofs[d]);
    const int n = dofs[d];
    if (loc.component == 0) {
      const int i = n % (g.nx() + 1), j = (n / (g.nx() + 1)) % g.ny(), k = n / ((g.nx() + 1) * g.ny());
      trip.emplace_back(r, g.cell(i, j, k), 1.0 / dx);
      trip.emplace_back(r, g.cell(i - 1, j, k), -1.0 / dx);
    } else if (loc.component == 1) {
      const int m = n - g.off_u2();
      const int i = m % g.nx(), j = (m / g.nx()) % (g.ny() + 1), k = m / (g.nx() * (g.ny() + 1));
      trip.emplace_back(r, g.cell(i, j, k), 1.0 / dy);
      trip.emplace_back(r, g.cell(i, j - 1, k), -1.0 / dy);
    } else {
      const int m = n - g.off_u3();
      const int i = m % g.nx(), j = (m / g.nx()) % g.ny(), k = m / (g.nx() * g.ny());
      trip.emplace_back(r, g.cell(i, j, k), ez);
      trip.emplace_back(r, g.cell(i, j, k - 1), -ez);
    }
  }
  SpMat m(static_cast<Eigen::Index>(dofs.size()), g.n_cells());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

std::vector<int> deps_matrix_rows(const Grid3& g, double eps) {
  const LinearStencil st = deps_stencil(g, eps);
  std::vector<int> rows;
  rows.reserve(st.rows());
  for (int r = 0; r < st.rows(); ++r) {
    bool touches_trace = false;
    for (int n = st.row_ptr[r]; n < st.row_ptr[r + 1]; ++n)
      touches_trace |= st.col[n] >= st.n_values;
    if (!touches_trace) rows.push_back(r);
  }
  return rows;
}

SpMat deps_matrix(const Grid3& g, double eps, std::vector<double>* weights) {
  const LinearStencil st = deps_stencil(g, eps);
  const std::vector<int> rows = deps_matrix_rows(g, eps);
  if (weights) {
    weights->resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) (*weights)[r] = st.weight[rows[r]];
  }
  return restrict_stencil(g, st, rows);
}

namespace {

struct Tangential {
  std::vector<double> a, b, w;  // cell-centered components and weights
};

// Averages the tangential trace to bottom cell centers.
Tangential trace_at_cells(const Field& f) {
  const Grid3& g = *f.grid;
  const int nx = g.nx(), ny = g.ny();
  Tangential t;
  t.a.resize(nx * ny);
  t.b.assign(nx * ny, 0.0);
  t.w.assign(nx * ny, g.dx() * g.dy());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int c = j * nx + i;
      t.a[c] = 0.5 * (f.trace[g.t1(i, j)] + f.trace[g.t1(i + 1, j)]);
      if (g.dim() == 2) t.b[c] = 0.5 * (f.trace[g.t2(i, j)] + f.trace[g.t2(i, j + 1)]);
    }
  return t;
}

}  // namespace

double norm(const Field& f, double p, Restriction where) {
  return norm(f, p, where, Mat2::Identity());
}

double norm(const Field& f, double p, Restriction where, const Mat2& K) {
  if (!f.grid) throw UsageError("field has no grid");
  if (!(p >= 1.0)) throw ParameterError("norm exponent must be >= 1");
  const bool identity = K == Mat2::Identity();
  const Grid3& g = *f.grid;
  if (where == Restriction::Gamma0) {
    if (!f.velocity()) throw UsageError("Gamma0 norms are only defined for velocity fields");
    if (p == 2.0 && identity) {
      return std::sqrt(kernels::weighted_power_sum_omp(f.trace, f.trace_weights(), 2.0));
    }
    const Tangential t = trace_at_cells(f);
    std::vector<double> mag(t.a.size());
    for (std::size_t c = 0; c < mag.size(); ++c) mag[c] = (K * Vec2(t.a[c], t.b[c])).norm();
    return std::pow(kernels::weighted_power_sum_omp(mag, t.w, p), 1.0 / p);
  }
  if (!f.velocity() || (p == 2.0 && identity)) {
    return std::pow(kernels::weighted_power_sum_omp(f.values, f.weights(), p), 1.0 / p);
  }
  // Cell-centered magnitude for p != 2 or anisotropic weighting.
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();
  std::vector<double> mag(g.n_cells()), w(g.n_cells());
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int c = g.cell(i, j, k);
        Vec2 ut(0.5 * (f.values[g.u1(i, j, k)] + f.values[g.u1(i + 1, j, k)]), 0.0);
        if (g.dim() == 2) ut[1] = 0.5 * (f.values[g.u2(i, j, k)] + f.values[g.u2(i, j + 1, k)]);
        const double u3 = 0.5 * (f.values[g.u3(i, j, k)] + f.values[g.u3(i, j, k + 1)]);
        mag[c] = std::sqrt((K * ut).squaredNorm() + u3 * u3);
        w[c] = g.dx() * g.dy() * g.height().cell(i, j) / nz;
      }
  return std::pow(kernels::weighted_power_sum_omp(mag, w, p), 1.0 / p);
}

double weighted_mean(const Field& p) {
  if (p.velocity()) throw UsageError("weighted_mean expects a pressure field");
  const std::vector<double> w = p.weights();
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < w.size(); ++n) {
    num += w[n] * p.values[n];
    den += w[n];
  }
  return num / den;
}

Field zero_mean(const Field& p) {
  Field out = p;
  const double m = weighted_mean(p);
  for (double& v : out.values) v -= m;
  out.zero_mean = true;
  return out;
}

}  // namespace thinslip
