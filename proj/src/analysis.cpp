#include "thinslip/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "thinslip/errors.hpp"
#include "thinslip/operators.hpp"

namespace thinslip {

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw UsageError("slope fit needs at least 2 points");
  const double n = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [e, v] : points) {
    if (!(e > 0.0)) throw DataError("slope fit needs eps > 0");
    if (!(v > 0.0)) throw DataError("slope fit needs positive values");
    sx += std::log(e);
    sy += std::log(v);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [e, v] : points) {
    const double dx = std::log(e) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(v) - my);
  }
  if (sxx == 0.0) throw DataError("slope fit needs distinct eps values");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  const double icept = my - fit.slope * mx;
  for (const auto& [e, v] : points) {
    const double pred = std::exp(icept + fit.slope * std::log(e));
    fit.residual = std::max(fit.residual, std::abs(v / pred - 1.0));
  }
  return fit;
}

NormBundle measure_norms(const FullOrderSolution& sol) {
  const Field& u = sol.velocity;
  const Grid3& g = *u.grid;
  NormBundle nb;
  nb.eps = sol.eps;
  nb.u_l2 = norm(u, 2.0, Restriction::Omega);
  nb.deps_l2 = apply_Deps(u, sol.eps).l2_norm();
  nb.wall_ls = norm(u, sol.params.s, Restriction::Gamma0, effective_K(sol.params, g.dim()));
  nb.p_l2 = norm(sol.pressure, 2.0, Restriction::Omega);
  const std::vector<double> w = u.weights();
  double s3 = 0.0;
  for (int n = g.off_u3(); n < g.n_velocity(); ++n) s3 += w[n] * u.values[n] * u.values[n];
  nb.u3_l2 = std::sqrt(s3);
  return nb;
}

namespace {

std::vector<std::pair<double, double>> series(const std::vector<NormBundle>& norms,
                                              double NormBundle::*field) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& nb : norms) pts.emplace_back(nb.eps, nb.*field);
  return pts;
}

}  // namespace

SweepReport verify_apriori(std::vector<NormBundle> norms, const FluidParams& params) {
  if (norms.size() < 3) throw UsageError("a priori checks need at least 3 eps values");
  std::sort(norms.begin(), norms.end(),
            [](const NormBundle& a, const NormBundle& b) { return a.eps > b.eps; });
  SweepReport rep;
  rep.norms = norms;
  for (const auto& nb : norms)
    if (nb.u_l2 == 0.0) {
      rep.verdict = "identically zero";
      return rep;
    }

  rep.u_slope = fit_slope(series(norms, &NormBundle::u_l2));
  rep.deps_slope = fit_slope(series(norms, &NormBundle::deps_l2));
  rep.wall_slope = fit_slope(series(norms, &NormBundle::wall_ls));
  rep.p_slope = fit_slope(series(norms, &NormBundle::p_l2));
  bool u3_zero = false;
  for (const auto& nb : norms) u3_zero |= nb.u3_l2 == 0.0;
  if (!u3_zero) rep.u3_slope = fit_slope(series(norms, &NormBundle::u3_l2));

  double pmin = norms[0].p_l2, pmax = norms[0].p_l2;
  for (const auto& nb : norms) {
    pmin = std::min(pmin, nb.p_l2);
    pmax = std::max(pmax, nb.p_l2);
  }
  rep.pressure_ratio = pmin > 0.0 ? pmax / pmin : INFINITY;

  const double expo = (3.0 - params.gamma) / params.s;
  for (const auto& nb : norms) rep.wall_ratio.push_back(nb.wall_ls / std::pow(nb.eps, expo));
  rep.wall_ratio_growth = 0.0;
  for (std::size_t i = 0; i < norms.size(); ++i)
    for (std::size_t j = i + 1; j < norms.size(); ++j)
      rep.wall_ratio_growth = std::max(rep.wall_ratio_growth, rep.wall_ratio[j] / rep.wall_ratio[i]);

  rep.checks = {
      {"velocity slope", rep.u_slope.slope >= 2.0 - kSlopeSlack, rep.u_slope.slope,
       2.0 - kSlopeSlack},
      {"strain slope", rep.deps_slope.slope >= 1.0 - kSlopeSlack, rep.deps_slope.slope,
       1.0 - kSlopeSlack},
      {"pressure ratio", rep.pressure_ratio <= kPressureRatioMax, rep.pressure_ratio,
       kPressureRatioMax},
      {"wall ratio growth", rep.wall_ratio_growth <= kWallGrowthMax, rep.wall_ratio_growth,
       kWallGrowthMax},
  };
  rep.all_pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                             [](const Check& c) { return c.pass; });
  rep.verdict = rep.all_pass ? "pass" : "fail";
  return rep;
}

SweepReport verify_apriori(const std::vector<FullOrderSolution>& sweep,
                           const FluidParams& params) {
  std::vector<NormBundle> norms;
  for (const auto& s : sweep) norms.push_back(measure_norms(s));
  return verify_apriori(std::move(norms), params);
}

TraceSample trace_sample(const FullOrderSolution& sol) {
  const Grid3& g = *sol.velocity.grid;
  const double eps = sol.eps;
  const double s2 = 1.0 / (eps * eps);
  const double A = g.dx() * g.dy();
  const auto& tr = sol.velocity.trace;
  TraceSample ts;
  ts.eps = eps;
  ts.dim = g.dim();
  ts.nu = sol.params.nu;
  std::vector<Vec2> cells = trace_cell_average(g, tr);
  for (auto& v : cells) v *= s2;
  // The wall rows impose the law on bottom cells and share it between the
  // two cells adjacent to each face.
  const Mat2 K = effective_K(sol.params, g.dim());
  std::vector<Vec2> cell_law(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c)
    cell_law[c] = slip_traction(cells[c], K, sol.params.s, sol.delta);
  const int nx = g.nx(), ny = g.ny();
  auto add = [&](int t, int comp, int l, int r) {
    Vec2 b = 0.5 * (cells[l] + cells[r]);
    b[comp] = s2 * tr[t];
    Vec2 sh = Vec2::Zero(), w = Vec2::Zero(), law = Vec2::Zero();
    sh[comp] = sol.wall_shear[t];
    w[comp] = A;
    law[comp] = 0.5 * (cell_law[l][comp] + cell_law[r][comp]);
    ts.b.push_back(b);
    ts.t.push_back(sh);
    ts.w.push_back(w);
    ts.law.push_back(law);
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) add(g.t1(i, j), 0, j * nx + i - 1, j * nx + i);
  if (g.dim() == 2)
    for (int j = 1; j < ny; ++j)
      for (int i = 0; i < nx; ++i) add(g.t2(i, j), 1, (j - 1) * nx + i, j * nx + i);
  ts.u_l2 = s2 * norm(sol.velocity, 2.0, Restriction::Omega);
  const TensorField D = apply_Deps(sol.velocity, eps);
  double sum = 0.0;
  for (const auto& c : D.components)
    if (c.col == 2 && c.row < 2)
      for (std::size_t n = 0; n < c.values.size(); ++n) sum += c.weights[n] * c.values[n] * c.values[n];
  // D_eps(i,3) = eps^-1 d3 u_i, so d3(eps^-2 u) = eps^-1 D_eps(i,3).
  ts.dz_u_l2 = std::sqrt(sum) / eps;
  return ts;
}

RegimeIndicators regime_indicators(const TraceSample& s, const Mat2& K, double s_index,
                                   double delta) {
  double bb = 0.0, tt = 0.0, rr = 0.0;
  for (std::size_t c = 0; c < s.b.size(); ++c) {
    const Vec2 law = s.law.empty() ? slip_traction(s.b[c], K, s_index, delta) : s.law[c];
    const Vec2 r = s.t[c] - law;
    bb += s.w[c].dot(s.b[c].cwiseAbs2());
    tt += s.w[c].dot(s.t[c].cwiseAbs2());
    rr += s.w[c].dot(r.cwiseAbs2());
  }
  RegimeIndicators r;
  r.eps = s.eps;
  r.sub = s.u_l2 > 0.0 ? std::sqrt(bb) / s.u_l2 : 0.0;
  r.super = s.dz_u_l2 > 0.0 ? std::sqrt(tt) / (s.nu * s.dz_u_l2) : 0.0;
  if (tt > 0.0) r.crit = std::sqrt(rr / tt);
  else r.crit = rr > 0.0 ? INFINITY : 0.0;
  return r;
}

RegimeVerdict regime_identify(const std::vector<TraceSample>& samples, const FluidParams& params,
                              double delta) {
  if (samples.empty()) throw UsageError("regime identification needs at least one sample");
  RegimeVerdict v;
  bool zero = true;
  for (const auto& s : samples) zero &= s.u_l2 == 0.0;
  if (zero) {
    v.verdict = "zero-flow, indeterminate";
    return v;
  }
  const Mat2 K = effective_K(params, samples[0].dim);
  for (const auto& s : samples) v.indicators.push_back(regime_indicators(s, K, params.s, delta));
  std::sort(v.indicators.begin(), v.indicators.end(),
            [](const RegimeIndicators& a, const RegimeIndicators& b) { return a.eps > b.eps; });

  const auto passes = [&](double RegimeIndicators::*f) {
    const double last = v.indicators.back().*f, first = v.indicators.front().*f;
    if (!(last <= kRegimeThreshold)) return false;
    return last <= kRegimeFloor || last <= first;
  };
  struct Candidate {
    RegimeKind kind;
    double RegimeIndicators::*field;
  };
  const Candidate cands[] = {{RegimeKind::Subcritical, &RegimeIndicators::sub},
                             {RegimeKind::Critical, &RegimeIndicators::crit},
                             {RegimeKind::Supercritical, &RegimeIndicators::super}};
  double best = INFINITY;
  for (const auto& c : cands) {
    if (!passes(c.field)) continue;
    const double val = v.indicators.back().*(c.field);
    if (val < best) {
      best = val;
      v.kind = c.kind;
    }
  }
  v.verdict = v.kind ? std::string(to_string(*v.kind)) : "unidentified";
  return v;
}

namespace {

using CellVec = std::array<double, 3>;

std::vector<CellVec> cell_centered(const Field& f) {
  const Grid3& g = *f.grid;
  std::vector<CellVec> out(g.n_cells());
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        CellVec& v = out[g.cell(i, j, k)];
        v[0] = 0.5 * (f.values[g.u1(i, j, k)] + f.values[g.u1(i + 1, j, k)]);
        v[1] = g.dim() == 2 ? 0.5 * (f.values[g.u2(i, j, k)] + f.values[g.u2(i, j + 1, k)]) : 0.0;
        v[2] = 0.5 * (f.values[g.u3(i, j, k)] + f.values[g.u3(i, j, k + 1)]);
      }
  return out;
}

}  // namespace

LimitError field_distance(const Field& a, double scale, const Field& b) {
  if (!a.velocity() || !b.velocity() || !a.grid || !b.grid) {
    throw UsageError("field_distance expects velocity fields");
  }
  const Grid3& g = *a.grid;
  const Grid3& gb = *b.grid;
  if (!(g.domain() == gb.domain()) || g.nz() != gb.nz() ||
      g.height().cells() != gb.height().cells()) {
    throw UsageError("fields live on different geometries");
  }
  const std::vector<CellVec> ca = cell_centered(a), cb = cell_centered(b);
  LimitError e;
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const double h = g.height().cell(i, j), dz = h / g.nz();
        const double w = g.dx() * g.dy() * dz;
        const int c = g.cell(i, j, k);
        for (int m = 0; m < 3; ++m) {
          const double d = scale * ca[c][m] - cb[c][m];
          e.l2 += w * d * d;
          e.ref_l2 += w * cb[c][m] * cb[c][m];
        }
        if (k + 1 < g.nz()) {
          const int up = g.cell(i, j, k + 1);
          for (int m = 0; m < 3; ++m) {
            const double da = scale * (ca[up][m] - ca[c][m]) / dz;
            const double db = (cb[up][m] - cb[c][m]) / dz;
            e.dz += w * (da - db) * (da - db);
            e.ref_dz += w * db * db;
          }
        }
      }
  e.l2 = std::sqrt(e.l2);
  e.ref_l2 = std::sqrt(e.ref_l2);
  e.dz = std::sqrt(e.dz);
  e.ref_dz = std::sqrt(e.ref_dz);
  return e;
}

LimitError compare_limit(const FullOrderSolution& sol, const LimitSolution& limit) {
  return field_distance(sol.velocity, 1.0 / (sol.eps * sol.eps), limit.velocity);
}

}  // namespace thinslip
