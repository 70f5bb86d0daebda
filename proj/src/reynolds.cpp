#include "thinslip/reynolds.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "thinslip/errors.hpp"
#include "thinslip/kernels.hpp"
#include "thinslip/operators.hpp"
#include "thinslip/problem.hpp"

namespace thinslip {

namespace {

// Cell-centered derivative of p along one axis; one-sided at the ends.
double cell_derivative(const std::vector<double>& p, int n, int stride, int idx, int pos,
                       double h) {
  if (n < 2) return 0.0;
  if (pos == 0) return (p[idx + stride] - p[idx]) / h;
  if (pos == n - 1) return (p[idx] - p[idx - stride]) / h;
  return (p[idx + stride] - p[idx - stride]) / (2.0 * h);
}

struct FaceSet {
  std::vector<Vec2> G;
  std::vector<double> h;
  std::vector<bool> interior;
};

}  // namespace

void face_drives(const Field& pressure, const VectorFn& forcing, std::vector<Vec2>& xface,
                 std::vector<Vec2>& yface) {
  if (pressure.kind != FieldKind::PressureReduced) {
    throw UsageError("face_drives expects a PressureReduced field");
  }
  const ReducedDomain& d = pressure.grid->domain();
  const int nx = d.nx, ny = d.ny;
  const double dx = d.dx(), dy = d.dy();
  const auto& p = pressure.values;
  std::vector<double> gx(nx * ny), gy(nx * ny, 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int c = d.cell(i, j);
      gx[c] = cell_derivative(p, nx, 1, c, i, dx);
      if (d.dim == 2) gy[c] = cell_derivative(p, ny, nx, c, j, dy);
    }

  xface.assign((nx + 1) * ny, Vec2::Zero());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const Vec2 f = forcing(d.xf(i), d.yc(j));
      const int l = d.cell(std::max(i - 1, 0), j), r = d.cell(std::min(i, nx - 1), j);
      const double dn = (i > 0 && i < nx) ? (p[r] - p[l]) / dx : gx[i == 0 ? r : l];
      const double dt = 0.5 * (gy[l] + gy[r]);
      xface[j * (nx + 1) + i] = Vec2(f[0] - dn, f[1] - dt);
    }
  yface.clear();
  if (d.dim == 1) return;
  yface.assign(nx * (ny + 1), Vec2::Zero());
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec2 f = forcing(d.xc(i), d.yf(j));
      const int b = d.cell(i, std::max(j - 1, 0)), t = d.cell(i, std::min(j, ny - 1));
      const double dn = (j > 0 && j < ny) ? (p[t] - p[b]) / dy : gy[j == 0 ? t : b];
      const double dt = 0.5 * (gx[b] + gx[t]);
      yface[j * nx + i] = Vec2(f[0] - dt, f[1] - dn);
    }
}

namespace {

class ReynoldsProblem {
 public:
  ReynoldsProblem(std::shared_ptr<const Grid3> grid, const VectorFn& forcing,
                  const FluidParams& params)
      : grid_(std::move(grid)), forcing_(forcing), params_(params) {
    params_.validate();
    params_.K = effective_K(params, grid_->dim());
    regime_ = classify_regime(params.s, params.gamma);
    delta_ = problem_delta(params, grid_->height(), forcing);
  }

  const FluidParams& params() const { return params_; }
  Regime regime() const { return regime_; }
  double delta() const { return delta_; }

  Field zero_pressure() const { return Field::zeros(FieldKind::PressureReduced, grid_); }

  // Profiles on every interior face at pressure p (x-faces then y-faces).
  std::vector<ProfileSolution> profiles(const Field& p, std::vector<Vec2>& gx,
                                        std::vector<Vec2>& gy) const {
    face_drives(p, forcing_, gx, gy);
    std::vector<kernels::ColumnInput> cols;
    cols.reserve(gx.size() + gy.size());
    const HeightField& hf = grid_->height();
    const ReducedDomain& d = grid_->domain();
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i <= d.nx; ++i) cols.push_back({gx[j * (d.nx + 1) + i], hf.xface(i, j)});
    if (d.dim == 2)
      for (int j = 0; j <= d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) cols.push_back({gy[j * d.nx + i], hf.yface(i, j)});
    return kernels::solve_profiles_omp(cols, params_, regime_, delta_);
  }

  // Face mobility tensors for the current profiles.
  std::vector<Mat2> mobilities(const std::vector<ProfileSolution>& prof) const {
    std::vector<Mat2> m(prof.size());
    for (std::size_t f = 0; f < prof.size(); ++f) {
      const double h = prof[f].h, nu = params_.nu;
      switch (regime_.kind) {
        case RegimeKind::Subcritical:
          m[f] = (h * h * h / (12.0 * nu)) * Mat2::Identity();
          break;
        case RegimeKind::Supercritical:
          m[f] = (h * h * h / (3.0 * nu)) * Mat2::Identity();
          break;
        case RegimeKind::Critical:
          m[f] = frozen_mobility(slip_coefficient(prof[f].B, params_.K, params_.s, delta_), h,
                                 params_);
          break;
      }
    }
    return m;
  }

  // Linear solve with frozen mobilities; tangential drives are lagged.
  Field linear_solve(const std::vector<Mat2>& mob, const std::vector<Vec2>& gx,
                     const std::vector<Vec2>& gy) {
    const ReducedDomain& d = grid_->domain();
    const int nx = d.nx, ny = d.ny, nc = nx * ny;
    const double dx = d.dx(), dy = d.dy();
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nc);
    auto couple = [&](int l, int r, double w, double q0) {
      // Flux from l to r: q0 - w (p_r - p_l) / spacing, already scaled.
      trip.emplace_back(l, l, w);
      trip.emplace_back(l, r, -w);
      trip.emplace_back(r, r, w);
      trip.emplace_back(r, l, -w);
      rhs[l] -= q0;
      rhs[r] += q0;
    };
    for (int j = 0; j < ny; ++j)
      for (int i = 1; i < nx; ++i) {
        const int f = j * (nx + 1) + i;
        const Vec2 G = gx[f];
        const Vec2 F = forcing_(d.xf(i), d.yc(j));
        const Mat2& m = mob[f];
        couple(d.cell(i - 1, j), d.cell(i, j), m(0, 0) * dy / dx,
               (m(0, 0) * F[0] + m(0, 1) * G[1]) * dy);
      }
    if (d.dim == 2) {
      const int off = (nx + 1) * ny;
      for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          const int f = j * nx + i;
          const Vec2 G = gy[f];
          const Vec2 F = forcing_(d.xc(i), d.yf(j));
          const Mat2& m = mob[off + f];
          couple(d.cell(i, j - 1), d.cell(i, j), m(1, 1) * dx / dy,
                 (m(1, 1) * F[1] + m(1, 0) * G[0]) * dx);
        }
    }
    // Pin cell 0: drop its row and column.
    std::vector<Eigen::Triplet<double>> pinned;
    pinned.reserve(trip.size());
    for (const auto& t : trip)
      if (t.row() > 0 && t.col() > 0) pinned.emplace_back(t.row() - 1, t.col() - 1, t.value());
    Eigen::SparseMatrix<double> A(nc - 1, nc - 1);
    A.setFromTriplets(pinned.begin(), pinned.end());
    if (!analyzed_) {
      solver_.analyzePattern(A);
      analyzed_ = true;
    }
    solver_.factorize(A);
    if (solver_.info() != Eigen::Success) throw SolverError("Reynolds factorization failed", {});
    const Eigen::VectorXd x = solver_.solve(rhs.tail(nc - 1));
    Field p = zero_pressure();
    for (int c = 1; c < nc; ++c) p.values[c] = x[c - 1];
    return zero_mean(p);
  }

  // Max over cells of |sum of outward face fluxes| / cell area.
  double divergence(const std::vector<ProfileSolution>& prof) const {
    const ReducedDomain& d = grid_->domain();
    const int nx = d.nx, ny = d.ny;
    std::vector<double> div(nx * ny, 0.0);
    for (int j = 0; j < ny; ++j)
      for (int i = 1; i < nx; ++i) {
        const double q = prof[j * (nx + 1) + i].flux[0] * d.dy();
        div[d.cell(i - 1, j)] += q;
        div[d.cell(i, j)] -= q;
      }
    if (d.dim == 2) {
      const int off = (nx + 1) * ny;
      for (int j = 1; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
          const double q = prof[off + j * nx + i].flux[1] * d.dx();
          div[d.cell(i, j - 1)] += q;
          div[d.cell(i, j)] -= q;
        }
    }
    double m = 0.0;
    for (double v : div) m = std::max(m, std::abs(v) / d.cell_area());
    return m;
  }

  void fill_fluxes(const std::vector<ProfileSolution>& prof, LimitSolution& sol) const {
    const ReducedDomain& d = grid_->domain();
    const int nx = d.nx, ny = d.ny;
    sol.xface_flux.assign((nx + 1) * ny, Vec2::Zero());
    for (int j = 0; j < ny; ++j)
      for (int i = 1; i < nx; ++i) sol.xface_flux[j * (nx + 1) + i] = prof[j * (nx + 1) + i].flux;
    sol.yface_flux.clear();
    if (d.dim == 1) return;
    const int off = (nx + 1) * ny;
    sol.yface_flux.assign(nx * (ny + 1), Vec2::Zero());
    for (int j = 1; j < ny; ++j)
      for (int i = 0; i < nx; ++i) sol.yface_flux[j * nx + i] = prof[off + j * nx + i].flux;
  }

 private:
  std::shared_ptr<const Grid3> grid_;
  VectorFn forcing_;
  FluidParams params_;
  Regime regime_{RegimeKind::Critical, 0.0};
  double delta_ = 0.0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
  bool analyzed_ = false;
};

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

LimitSolution solve_limit(std::shared_ptr<const Grid3> grid, const VectorFn& forcing,
                          const FluidParams& params, const LimitOptions& options) {
  if (!grid) throw UsageError("missing grid");
  ReynoldsProblem prob(grid, forcing, params);
  LimitSolution sol;
  sol.params = params;
  sol.regime = prob.regime();
  sol.delta = prob.delta();

  Field p = prob.zero_pressure();
  p.zero_mean = true;
  std::vector<Vec2> gx, gy;
  std::vector<ProfileSolution> prof = prob.profiles(p, gx, gy);

  if (sol.regime.kind != RegimeKind::Critical) {
    p = prob.linear_solve(prob.mobilities(prof), gx, gy);
    prof = prob.profiles(p, gx, gy);
  } else {
    bool converged = false;
    while (!converged) {
      sol.picard_history.push_back(prob.divergence(prof));
      if (sol.picard_iters == options.max_picard) {
        std::ostringstream os;
        os << "Picard iteration did not converge in " << options.max_picard << " steps";
        throw SolverError(os.str(), sol.picard_history);
      }
      const Field target = prob.linear_solve(prob.mobilities(prof), gx, gy);
      Field next = p;
      double diff = 0.0;
      for (std::size_t c = 0; c < p.values.size(); ++c) {
        next.values[c] = p.values[c] + options.relax * (target.values[c] - p.values[c]);
        diff = std::max(diff, std::abs(next.values[c] - p.values[c]));
      }
      next = zero_mean(next);
      ++sol.picard_iters;
      converged = diff <= options.picard_tol * max_abs(next.values);
      p = std::move(next);
      prof = prob.profiles(p, gx, gy);
    }
  }
  sol.pressure = p;
  sol.flux_div_residual = prob.divergence(prof);
  prob.fill_fluxes(prof, sol);
  sol.velocity = reconstruct_velocity(p, forcing, params, sol.delta);
  return sol;
}

Field reconstruct_velocity(const Field& pressure, const VectorFn& forcing,
                           const FluidParams& params, double delta) {
  if (pressure.kind != FieldKind::PressureReduced) {
    throw UsageError("reconstruct_velocity expects a PressureReduced field");
  }
  const Grid3& g = *pressure.grid;
  const ReducedDomain& d = g.domain();
  FluidParams pe = params;
  pe.K = effective_K(params, g.dim());
  const Regime regime = classify_regime(params.s, params.gamma);
  std::vector<Vec2> gx, gy;
  face_drives(pressure, forcing, gx, gy);

  Field u = Field::zeros(FieldKind::VelocityReduced, pressure.grid);
  const HeightField& hf = g.height();
  for (int j = 0; j < d.ny; ++j)
    for (int i = 1; i < d.nx; ++i) {
      const double h = hf.xface(i, j);
      const ProfileSolution ps = solve_profile(gx[j * (d.nx + 1) + i], h, pe, regime, delta);
      for (int k = 0; k < g.nz(); ++k) u.values[g.u1(i, j, k)] = ps.velocity(g.zc(k, h))[0];
      u.trace[g.t1(i, j)] = ps.B[0];
    }
  if (d.dim == 2)
    for (int j = 1; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) {
        const double h = hf.yface(i, j);
        const ProfileSolution ps = solve_profile(gy[j * d.nx + i], h, pe, regime, delta);
        for (int k = 0; k < g.nz(); ++k) u.values[g.u2(i, j, k)] = ps.velocity(g.zc(k, h))[1];
        u.trace[g.t2(i, j)] = ps.B[1];
      }
  return u;
}

}  // namespace thinslip
