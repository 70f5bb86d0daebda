#include "thinslip/fullorder.hpp"

#include <Eigen/SparseCholesky>
#include <unsupported/Eigen/IterativeSolvers>
#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "thinslip/errors.hpp"
#include "thinslip/kernels.hpp"
#include "thinslip/operators.hpp"

namespace thinslip {

std::vector<Vec2> trace_cell_average(const Grid3& g, const std::vector<double>& trace) {
  const int nx = g.nx(), ny = g.ny();
  std::vector<Vec2> v(nx * ny, Vec2::Zero());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Vec2& c = v[j * nx + i];
      c[0] = 0.5 * (trace[g.t1(i, j)] + trace[g.t1(i + 1, j)]);
      if (g.dim() == 2) c[1] = 0.5 * (trace[g.t2(i, j)] + trace[g.t2(i, j + 1)]);
    }
  return v;
}

namespace {

double wall_factor(const FluidParams& p) { return std::pow(p.eps, p.gamma - 1.0); }

// Trace entries adjacent to bottom cell (i, j) with their component.
struct CellFaces {
  int idx[4];
  int comp[4];
  int n;
};

CellFaces cell_faces(const Grid3& g, int i, int j) {
  CellFaces f{};
  f.idx[0] = g.t1(i, j);
  f.idx[1] = g.t1(i + 1, j);
  f.comp[0] = f.comp[1] = 0;
  f.n = 2;
  if (g.dim() == 2) {
    f.idx[2] = g.t2(i, j);
    f.idx[3] = g.t2(i, j + 1);
    f.comp[2] = f.comp[3] = 1;
    f.n = 4;
  }
  return f;
}

bool trace_free(const Grid3& g, int t) {
  const int n1 = (g.nx() + 1) * g.ny();
  if (t < n1) {
    const int i = t % (g.nx() + 1);
    return i > 0 && i < g.nx();
  }
  const int j = (t - n1) / g.nx();
  return j > 0 && j < g.ny();
}

struct Decoded {
  int c, i, j, k;
};

Decoded decode(const Grid3& g, int n) {
  const int nx = g.nx(), ny = g.ny();
  if (n < g.off_u2()) return {0, n % (nx + 1), (n / (nx + 1)) % ny, n / ((nx + 1) * ny)};
  if (n < g.off_u3()) {
    const int m = n - g.off_u2();
    return {1, m % nx, (m / nx) % (ny + 1), m / (nx * (ny + 1))};
  }
  const int m = n - g.off_u3();
  return {2, m % nx, (m / nx) % ny, m / (nx * ny)};
}

int layout_index(const Grid3& g, int c, int i, int j, int k) {
  if (c == 0) return g.u1(i, j, k);
  if (c == 1) return g.u2(i, j, k);
  return g.u3(i, j, k);
}

class SaddleSystem {
 public:
  SaddleSystem(std::shared_ptr<const Grid3> grid, const FluidParams& params, int robin_order)
      : grid_(std::move(grid)), params_(params), order_(robin_order) {
    const Grid3& g = *grid_;
    if (!g.flat()) throw UsageError("full-order solves require a constant gap");
    if (order_ != 1 && order_ != 2) throw ParameterError("robin_order must be 1 or 2");
    params_.validate();
    n_d_ = static_cast<int>(g.interior_dofs().size());
    trace_dof_.assign(g.n_trace(), -1);
    for (int t = 0; t < g.n_trace(); ++t)
      if (trace_free(g, t)) {
        trace_dof_[t] = static_cast<int>(trace_list_.size());
        trace_list_.push_back(t);
      }
    n_t_ = static_cast<int>(trace_list_.size());
    n_p_ = g.n_cells() - 1;
    K_ = effective_K(params_, g.dim());
    K2_ = K_ * K_;

    std::vector<double> w;
    const SpMat D = deps_matrix(g, params_.eps, &w);
    Eigen::SparseMatrix<double> Dc = D;
    Eigen::VectorXd wv = Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    visc_ = params_.nu * Eigen::SparseMatrix<double>(Dc.transpose() * wv.asDiagonal() * Dc);
    grad_ = gradient_matrix(g, params_.eps);
  }

  int size() const { return n_d_ + n_t_ + n_p_; }
  const std::vector<int>& trace_list() const { return trace_list_; }
  const Mat2& K() const { return K_; }

  double wall_area() const { return grid_->dx() * grid_->dy(); }
  double nu_scaled() const { return params_.nu / (params_.eps * params_.eps); }

  // Wall shear nu' d3 u' at trace entry t from the one-sided stencil.
  double shear(const std::vector<double>& values, const std::vector<double>& trace, int t) const {
    const Grid3& g = *grid_;
    const int n1 = (g.nx() + 1) * g.ny();
    int u0, u1;
    if (t < n1) {
      const int i = t % (g.nx() + 1), j = t / (g.nx() + 1);
      u0 = g.u1(i, j, 0);
      u1 = g.u1(i, j, 1);
    } else {
      const int i = (t - n1) % g.nx(), j = (t - n1) / g.nx();
      u0 = g.u2(i, j, 0);
      u1 = g.u2(i, j, 1);
    }
    const double dz = g.dz();
    if (order_ == 1) return nu_scaled() * (values[u0] - trace[t]) / (0.5 * dz);
    return nu_scaled() * (9.0 * values[u0] - values[u1] - 8.0 * trace[t]) / (3.0 * dz);
  }

  // Solves with wall coefficients alpha (per bottom cell) and frozen
  // advecting velocity adv (may be null). Returns the GMRES iteration count.
  int solve(const std::vector<double>& alpha, const Field& force, const Field* adv,
            std::vector<double>& values, std::vector<double>& trace, std::vector<double>& p,
            double& residual) {
    const Grid3& g = *grid_;
    const auto& dofs = g.interior_dofs();
    const Eigen::SparseMatrix<double> M = assemble(alpha, order_, adv, 0.0);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size());
    const double V = g.cell_volume();
    for (int d = 0; d < n_d_; ++d) rhs[d] = V * force.values[dofs[d]];

    if (!precond_ready_) refactor(alpha);
    Eigen::VectorXd x = precond_.solve(rhs);
    int iters = 0;
    const double rn = rhs.norm();
    Eigen::GMRES<Eigen::SparseMatrix<double>, FactorPreconditioner> gmres;
    gmres.preconditioner().factor = &precond_;
    gmres.set_restart(80);
    gmres.setMaxIterations(400);
    gmres.setTolerance(1e-10);
    gmres.compute(M);
    // Defect correction with preconditioned GMRES on the residual.
    for (int pass = 0; rn > 0.0; ++pass) {
      const Eigen::VectorXd r = rhs - M * x;
      if (r.norm() <= kLinearTol * rn) break;
      if (pass == kMaxPasses) {
        std::ostringstream os;
        os << "saddle-point solve stalled on " << g.nx() << "x" << g.ny() << "x" << g.nz()
           << " grid at eps = " << params_.eps << ", residual " << r.norm() / rn;
        throw ConfigError("grid", os.str());
      }
      x += gmres.solve(r);
      iters += static_cast<int>(gmres.iterations());
    }
    // A preconditioner built from stale wall coefficients slows GMRES down.
    if (iters > kRefactorIters) precond_ready_ = false;
    residual = rn > 0.0 ? (M * x - rhs).norm() / rn : (M * x - rhs).norm();

    const int p0 = n_d_ + n_t_;
    values.assign(g.n_velocity(), 0.0);
    for (int d = 0; d < n_d_; ++d) values[dofs[d]] = x[d];
    trace.assign(g.n_trace(), 0.0);
    for (int q = 0; q < n_t_; ++q) trace[trace_list_[q]] = x[n_d_ + q];
    p.assign(g.n_cells(), 0.0);
    for (int c = 1; c < g.n_cells(); ++c) p[c] = x[p0 + c - 1];
    return iters;
  }

  struct FactorPreconditioner {
    using Factor = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                                         Eigen::AMDOrdering<int>>;
    const Factor* factor = nullptr;
    FactorPreconditioner() = default;
    template <typename M>
    explicit FactorPreconditioner(const M&) {}
    template <typename M>
    FactorPreconditioner& analyzePattern(const M&) { return *this; }
    template <typename M>
    FactorPreconditioner& factorize(const M&) { return *this; }
    template <typename M>
    FactorPreconditioner& compute(const M&) { return *this; }
    template <typename Rhs>
    Eigen::VectorXd solve(const Eigen::MatrixBase<Rhs>& b) const { return factor->solve(b); }
    Eigen::ComputationInfo info() const { return Eigen::Success; }
  };

 private:
  static constexpr double kLinearTol = 1e-13;
  static constexpr int kRefactorIters = 40;
  static constexpr int kMaxPasses = 20;

  // Symmetric quasi-definite companion: two-point wall rows, no convection,
  // and a small negative pressure diagonal.
  void refactor(const std::vector<double>& alpha) {
    const double rho = 1e-10 * grid_->cell_volume() / params_.nu;
    const Eigen::SparseMatrix<double> P = assemble(alpha, 1, nullptr, rho);
    if (!precond_analyzed_) {
      precond_.analyzePattern(P);
      precond_analyzed_ = true;
    }
    precond_.factorize(P);
    if (precond_.info() != Eigen::Success) {
      std::ostringstream os;
      os << "saddle-point factorization failed on " << grid_->nx() << "x" << grid_->ny() << "x"
         << grid_->nz() << " grid at eps = " << params_.eps;
      throw ConfigError("grid", os.str());
    }
    precond_ready_ = true;
  }

  Eigen::SparseMatrix<double> assemble(const std::vector<double>& alpha, int order,
                                       const Field* adv, double rho) const {
    const Grid3& g = *grid_;
    const auto& dof_of = g.dof_of();
    const double V = g.cell_volume();
    const double A = wall_area();
    const double dz = g.dz();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(visc_.nonZeros() + 4 * grad_.nonZeros() + 16 * n_t_);

    for (int c = 0; c < visc_.outerSize(); ++c)
      for (Eigen::SparseMatrix<double>::InnerIterator it(visc_, c); it; ++it)
        trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());

    const int p0 = n_d_ + n_t_;
    for (int r = 0; r < grad_.outerSize(); ++r)
      for (SpMat::InnerIterator it(grad_, r); it; ++it) {
        const int cell = static_cast<int>(it.col());
        if (cell == 0) continue;
        trip.emplace_back(r, p0 + cell - 1, V * it.value());
        trip.emplace_back(p0 + cell - 1, r, V * it.value());
      }
    if (rho > 0.0)
      for (int c = 0; c < n_p_; ++c) trip.emplace_back(p0 + c, p0 + c, -rho);

    // Wall rows: the bottom edge of the viscous form and the trace equations.
    const int n1 = (g.nx() + 1) * g.ny();
    for (int q = 0; q < n_t_; ++q) {
      const int t = trace_list_[q];
      const int row_t = n_d_ + q;
      int u0, u1;
      if (t < n1) {
        const int i = t % (g.nx() + 1), j = t / (g.nx() + 1);
        u0 = dof_of[g.u1(i, j, 0)];
        u1 = dof_of[g.u1(i, j, 1)];
      } else {
        const int i = (t - n1) % g.nx(), j = (t - n1) / g.nx();
        u0 = dof_of[g.u2(i, j, 0)];
        u1 = dof_of[g.u2(i, j, 1)];
      }
      // F = a0 u0 + a1 u1 + ab ub; the u0 row gains A F, the trace row -A F.
      double a0, a1, ab;
      if (order == 1) {
        const double beta = nu_scaled() / (0.5 * dz);
        a0 = beta;
        a1 = 0.0;
        ab = -beta;
      } else {
        const double cc = nu_scaled() / (3.0 * dz);
        a0 = 9.0 * cc;
        a1 = -cc;
        ab = -8.0 * cc;
      }
      for (int s : {1, -1}) {
        const int row = s > 0 ? u0 : row_t;
        trip.emplace_back(row, u0, s * A * a0);
        if (a1 != 0.0) trip.emplace_back(row, u1, s * A * a1);
        trip.emplace_back(row, row_t, s * A * ab);
      }
    }
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const CellFaces f = cell_faces(g, i, j);
        const double a = A * alpha[j * g.nx() + i];
        for (int m = 0; m < f.n; ++m) {
          const int qm = trace_dof_[f.idx[m]];
          if (qm < 0) continue;
          for (int l = 0; l < f.n; ++l) {
            const int ql = trace_dof_[f.idx[l]];
            if (ql < 0) continue;
            trip.emplace_back(n_d_ + qm, n_d_ + ql, 0.25 * a * K2_(f.comp[m], f.comp[l]));
          }
        }
      }

    if (adv) add_convection(*adv, trip);

    Eigen::SparseMatrix<double> M(size(), size());
    M.setFromTriplets(trip.begin(), trip.end());
    M.makeCompressed();
    return M;
  }

  // First-order upwind (w . grad_eps) u with frozen w.
  void add_convection(const Field& w, std::vector<Eigen::Triplet<double>>& trip) const {
    const Grid3& g = *grid_;
    const int nx = g.nx(), ny = g.ny(), nz = g.nz();
    const double V = g.cell_volume();
    // Cell-centered advecting velocity.
    std::vector<std::array<double, 3>> wc(g.n_cells());
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          auto& v = wc[g.cell(i, j, k)];
          v[0] = 0.5 * (w.values[g.u1(i, j, k)] + w.values[g.u1(i + 1, j, k)]);
          v[1] = g.dim() == 2 ? 0.5 * (w.values[g.u2(i, j, k)] + w.values[g.u2(i, j + 1, k)]) : 0.0;
          v[2] = 0.5 * (w.values[g.u3(i, j, k)] + w.values[g.u3(i, j, k + 1)]);
        }
    const double h[3] = {g.dx(), g.dy(), params_.eps * g.dz()};
    const auto& dofs = g.interior_dofs();
    const auto& dof_of = g.dof_of();
    for (int r = 0; r < n_d_; ++r) {
      const Decoded d = decode(g, dofs[r]);
      // Face normal direction is d.c; average the two adjacent cells.
      int lo[3] = {d.i, d.j, d.k};
      lo[d.c] -= 1;
      const auto& ca = wc[g.cell(lo[0], lo[1], lo[2])];
      const auto& cb = wc[g.cell(d.i, d.j, d.k)];
      const int extent[3] = {nx + (d.c == 0), ny + (d.c == 1), nz + (d.c == 2)};
      for (int dir = 0; dir < 3; ++dir) {
        if (dir == 1 && g.dim() == 1) continue;
        const double a = 0.5 * (ca[dir] + cb[dir]);
        if (a == 0.0) continue;
        int nb[3] = {d.i, d.j, d.k};
        nb[dir] += a > 0.0 ? -1 : 1;
        const bool inside = nb[dir] >= 0 && nb[dir] < extent[dir];
        const double dist = inside ? h[dir] : 0.5 * h[dir];
        const double coef = V * std::abs(a) / dist;
        trip.emplace_back(r, r, coef);
        if (inside) {
          const int col = dof_of[layout_index(g, d.c, nb[0], nb[1], nb[2])];
          if (col >= 0) trip.emplace_back(r, col, -coef);
        } else if (dir == 2 && nb[2] < 0 && d.c < 2) {
          const int t = d.c == 0 ? g.t1(d.i, d.j) : g.t2(d.i, d.j);
          const int q = trace_dof_[t];
          if (q >= 0) trip.emplace_back(r, n_d_ + q, -coef);
        }
      }
    }
  }

  std::shared_ptr<const Grid3> grid_;
  FluidParams params_;
  int order_;
  int n_d_ = 0, n_t_ = 0, n_p_ = 0;
  std::vector<int> trace_dof_, trace_list_;
  Mat2 K_, K2_;
  Eigen::SparseMatrix<double> visc_;
  SpMat grad_;
  FactorPreconditioner::Factor precond_;
  bool precond_analyzed_ = false;
  bool precond_ready_ = false;
};

std::vector<double> wall_coefficients(const Grid3& g, const FluidParams& params, const Mat2& K,
                                      double delta_full, const std::vector<double>& trace) {
  const std::vector<Vec2> v = trace_cell_average(g, trace);
  const double fac = wall_factor(params);
  std::vector<double> alpha(v.size());
  for (std::size_t c = 0; c < v.size(); ++c)
    alpha[c] = fac * slip_coefficient(v[c], K, params.s, delta_full);
  return alpha;
}

// Initial trace: per-column closure with G = f' and the eps-scaled friction.
std::vector<double> initial_trace(const Grid3& g, const Field& force, const FluidParams& params,
                                  double delta) {
  std::vector<double> trace(g.n_trace(), 0.0);
  if (params.navier_mode()) return trace;
  const double eps = params.eps;
  const Regime crit{RegimeKind::Critical, 3.0 - 2.0 * params.s};
  FluidParams p = params;
  const double shift = params.gamma - crit.gamma_star;
  p.K = std::pow(eps, shift / params.s) * effective_K(params, g.dim());
  const double d = delta * std::pow(eps, shift / params.s);
  const double h = g.height().cells()[0];
  for (int t = 0; t < g.n_trace(); ++t) {
    if (!trace_free(g, t)) continue;
    const int n1 = (g.nx() + 1) * g.ny();
    const bool first = t < n1;
    const int idx = first ? g.u1(t % (g.nx() + 1), t / (g.nx() + 1), 0)
                          : g.u2((t - n1) % g.nx(), (t - n1) / g.nx(), 0);
    const Vec2 G = first ? Vec2(force.values[idx], 0.0) : Vec2(0.0, force.values[idx]);
    const ProfileSolution ps = solve_profile(G, h, p, crit, d);
    trace[t] = eps * eps * (first ? ps.B[0] : ps.B[1]);
  }
  return trace;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

FullOrderSolution run_full(std::shared_ptr<const Grid3> grid, const VectorFn& forcing,
                           const FluidParams& params, const FullOptions& options, bool linear) {
  if (!grid) throw UsageError("missing grid");
  const Grid3& g = *grid;
  SaddleSystem sys(grid, params, options.robin_order);

  FullOrderSolution sol;
  sol.params = params;
  sol.options = options;
  sol.eps = params.eps;
  sol.delta = problem_delta(params, g.height(), forcing);
  const double delta_full = params.eps * params.eps * sol.delta;
  sol.forcing = Field::sample_velocity(FieldKind::VelocityFull, grid,
                                       [&](double z1, double z2, double) -> Vec3 {
                                         const Vec2 f = forcing(z1, z2);
                                         return {f[0], f[1], 0.0};
                                       });
  std::vector<double> values(g.n_velocity(), 0.0), trace, p;
  trace = linear ? std::vector<double>(g.n_trace(), 0.0)
                 : initial_trace(g, sol.forcing, params, sol.delta);
  const bool single = linear || (params.navier_mode() && !options.convection);
  Field adv = Field::zeros(FieldKind::VelocityFull, grid);

  bool converged = false;
  while (!converged) {
    if (sol.outer_iters == options.max_outer) {
      std::ostringstream os;
      os << "outer iteration did not converge in " << options.max_outer << " steps";
      throw SolverError(os.str(), sol.outer_history);
    }
    sol.boundary_coeff = wall_coefficients(g, params, sys.K(), delta_full, trace);
    std::vector<double> nv, nt;
    sol.linear_iters.push_back(sys.solve(sol.boundary_coeff, sol.forcing,
                                         options.convection ? &adv : nullptr, nv, nt, p,
                                         sol.saddle_residual));
    double diff = 0.0, scale = 0.0;
    for (std::size_t n = 0; n < nv.size(); ++n) {
      diff = std::max(diff, std::abs(nv[n] - values[n]));
      scale = std::max(scale, std::abs(nv[n]));
    }
    for (std::size_t n = 0; n < nt.size(); ++n) {
      diff = std::max(diff, std::abs(nt[n] - trace[n]));
      scale = std::max(scale, std::abs(nt[n]));
    }
    values = std::move(nv);
    trace = std::move(nt);
    adv.values = values;
    ++sol.outer_iters;
    const double rel = scale > 0.0 ? diff / scale : 0.0;
    sol.outer_history.push_back(rel);
    converged = single || rel <= options.outer_tol;
  }

  sol.velocity = Field::zeros(FieldKind::VelocityFull, grid);
  sol.velocity.values = values;
  sol.velocity.trace = trace;
  Field pf = Field::zeros(FieldKind::PressureFull, grid);
  pf.values = p;
  sol.pressure = zero_mean(pf);
  sol.wall_shear.assign(g.n_trace(), 0.0);
  for (int t : sys.trace_list()) sol.wall_shear[t] = sys.shear(values, trace, t);
  const Field div = apply_diveps(sol.velocity, params.eps);
  sol.max_divergence = max_abs(div.values);
  sol.energy = boundary_term_energy(sol, params);
  return sol;
}

}  // namespace

FullOrderSolution solve_full(std::shared_ptr<const Grid3> grid, const VectorFn& forcing,
                             const FluidParams& params, const FullOptions& options) {
  return run_full(std::move(grid), forcing, params, options, false);
}

FullOrderSolution solve_full_linear(std::shared_ptr<const Grid3> grid, const VectorFn& forcing,
                                    const FluidParams& params, int robin_order) {
  if (!params.navier_mode()) throw UsageError("the linear path requires s = 2");
  FullOptions o;
  o.robin_order = robin_order;
  return run_full(std::move(grid), forcing, params, o, true);
}

EnergyBalance boundary_term_energy(const FullOrderSolution& sol, const FluidParams& params) {
  EnergyBalance e;
  if (!sol.velocity.grid) return e;
  const Grid3& g = *sol.velocity.grid;
  const auto& u = sol.velocity.values;
  const auto& tr = sol.velocity.trace;

  const std::vector<int> rows = deps_matrix_rows(g, params.eps);
  const LinearStencil st = deps_stencil(g, params.eps);
  std::vector<double> out(st.rows());
  kernels::apply_stencil_serial(st, u, tr, out);
  for (int r : rows) e.viscous += params.nu * st.weight[r] * out[r] * out[r];

  const double A = g.dx() * g.dy();
  const int n1 = (g.nx() + 1) * g.ny();
  for (int t = 0; t < g.n_trace(); ++t) {
    const int u0 = t < n1 ? g.u1(t % (g.nx() + 1), t / (g.nx() + 1), 0)
                          : g.u2((t - n1) % g.nx(), (t - n1) / g.nx(), 0);
    e.viscous += A * sol.wall_shear[t] * (u[u0] - tr[t]);
  }

  const Mat2 K = effective_K(params, g.dim());
  const std::vector<Vec2> v = trace_cell_average(g, tr);
  for (std::size_t c = 0; c < v.size(); ++c)
    e.boundary += A * sol.boundary_coeff[c] * (K * v[c]).squaredNorm();

  const std::vector<double> w = sol.forcing.weights();
  for (int d : g.interior_dofs()) e.work += w[d] * sol.forcing.values[d] * u[d];

  const double lhs = e.viscous + e.boundary;
  const double err = std::abs(lhs - e.work);
  e.mismatch = e.work != 0.0 ? err / std::abs(e.work) : err;
  return e;
}

std::vector<double> boundary_operator(const Grid3& g, const FluidParams& params, double delta,
                                      const std::vector<double>& trace) {
  const Mat2 K = effective_K(params, g.dim());
  const double d = params.eps * params.eps * delta;
  const double A = g.dx() * g.dy();
  const std::vector<Vec2> v = trace_cell_average(g, trace);
  std::vector<double> out(g.n_trace(), 0.0);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const Vec2& vc = v[j * g.nx() + i];
      const Vec2 flux = A * wall_factor(params) * slip_traction(vc, K, params.s, d);
      const CellFaces f = cell_faces(g, i, j);
      for (int m = 0; m < f.n; ++m) out[f.idx[m]] += 0.5 * flux[f.comp[m]];
    }
  return out;
}

}  // namespace thinslip
