#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "thinslip/errors.hpp"
#include "thinslip/fullorder.hpp"
#include "thinslip/operators.hpp"
#include "thinslip/reynolds.hpp"

using namespace thinslip;
using testing::box;

namespace {

FluidParams make(double s, double gamma, double eps) {
  FluidParams p;
  p.s = s;
  p.gamma = gamma;
  p.eps = eps;
  return p;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("zero forcing gives the zero state") {
  const auto g = box(4, 4, 3);
  const auto sol = solve_full(g, make_forcing({"zero", {}}, g->domain()), make(1.5, 0.0, 0.1));
  CHECK(max_abs(sol.velocity.values) == 0.0);
  CHECK(max_abs(sol.velocity.trace) == 0.0);
  CHECK(max_abs(sol.pressure.values) == 0.0);
  CHECK(sol.energy.viscous == 0.0);
  CHECK(sol.energy.boundary == 0.0);
  CHECK(sol.energy.work == 0.0);
}

TEST_CASE("critical power-law solve") {
  const auto g = box(6, 6, 4);
  const auto f = make_forcing({"rotational", {1.0}}, g->domain());
  const auto sol = solve_full(g, f, make(1.5, 0.0, 0.1));
  CHECK(sol.outer_iters > 1);
  CHECK(sol.outer_history.back() <= 1e-10);
  CHECK(sol.max_divergence <= 1e-10);
  CHECK(sol.energy.mismatch <= 1e-8);
  CHECK(sol.boundary_coeff.size() == 36u);
  CHECK(sol.pressure.zero_mean);
  CHECK(std::abs(weighted_mean(sol.pressure)) <= 1e-12 * max_abs(sol.pressure.values));

  // Wall constraints: every face not in the interior list is zero.
  const auto& dof = g->dof_of();
  for (int n = 0; n < g->n_velocity(); ++n)
    if (dof[n] < 0) CHECK(sol.velocity.values[n] == 0.0);
  for (int j = 0; j < g->ny(); ++j) {
    CHECK(sol.velocity.trace[g->t1(0, j)] == 0.0);
    CHECK(sol.velocity.trace[g->t1(g->nx(), j)] == 0.0);
  }
  CHECK(max_abs(sol.velocity.trace) > 0.0);
  // The recomputed balance matches the stored one.
  const auto e = boundary_term_energy(sol, sol.params);
  CHECK(e.mismatch == sol.energy.mismatch);
}

TEST_CASE("navier slip needs one outer iteration and matches the linear path") {
  const auto g = box(5, 4, 4);
  const auto f = make_forcing({"rotational", {1.0}}, g->domain());
  FluidParams p = make(2.0, -1.0, 0.1);
  p.K = navier_tensor(2.0);
  const auto a = solve_full(g, f, p);
  const auto b = solve_full_linear(g, f, p);
  CHECK(a.outer_iters == 1);
  CHECK(a.velocity.values == b.velocity.values);
  CHECK(a.velocity.trace == b.velocity.trace);
  CHECK(a.pressure.values == b.pressure.values);
  CHECK(a.energy.mismatch <= 1e-10);
  CHECK_THROWS_AS(solve_full_linear(g, f, make(1.5, 0.0, 0.1)), UsageError);
}

TEST_CASE("assembled wall operator is monotone") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> sign(-1.0, 1.0);
  const auto g = box(5, 4, 2);
  for (double s : {1.1, 1.5, 1.9})
    for (double delta : {0.0, 1e-6}) {
      FluidParams p = make(s, 3.0 - 2.0 * s, 0.1);
      p.K << 1.2, 0.3, 0.3, 0.9;
      for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> v(g->n_trace()), w(g->n_trace());
        for (int t = 0; t < g->n_trace(); ++t) {
          // delta = 0 keeps the traces away from the singular point.
          const double off = delta == 0.0 ? 1.0 : 0.0;
          v[t] = n(rng) + off;
          w[t] = n(rng) + off;
        }
        const auto Av = boundary_operator(*g, p, delta, v), Aw = boundary_operator(*g, p, delta, w);
        double m = 0.0;
        for (int t = 0; t < g->n_trace(); ++t) m += (Av[t] - Aw[t]) * (v[t] - w[t]);
        CHECK(m >= -1e-12);
      }
    }
}

TEST_CASE("mirror symmetry") {
  const auto g = box(6, 6, 4);
  const auto f = make_forcing({"rotational", {1.0}}, g->domain());
  const auto sol = solve_full(g, f, make(1.5, 0.0, 0.2));
  // The forcing flips sign under z1 -> 1 - z1 with v1 -> -v1, so u1 is even
  // and u2 is odd in z1.
  const int nx = g->nx();
  const auto& u = sol.velocity.values;
  const double scale = max_abs(u);
  for (int k = 0; k < g->nz(); ++k)
    for (int j = 0; j < g->ny(); ++j) {
      for (int i = 0; i <= nx; ++i)
        CHECK(std::abs(u[g->u1(i, j, k)] - u[g->u1(nx - i, j, k)]) <= 1e-10 * scale);
    }
  for (int k = 0; k < g->nz(); ++k)
    for (int j = 0; j <= g->ny(); ++j)
      for (int i = 0; i < nx; ++i)
        CHECK(std::abs(u[g->u2(i, j, k)] + u[g->u2(nx - 1 - i, j, k)]) <= 1e-10 * scale);
}

TEST_CASE("convection is a higher-order effect") {
  const auto g = box(5, 5, 4);
  const auto f = make_forcing({"rotational", {1.0}}, g->domain());
  std::vector<double> diffs;
  for (double eps : {0.1, 0.05}) {
    FluidParams p = make(1.5, 0.0, eps);
    FullOptions on;
    on.convection = true;
    const auto a = solve_full(g, f, p);
    const auto b = solve_full(g, f, p, on);
    CHECK(b.outer_iters > 0);
    double d = 0.0, n = 0.0;
    const auto w = a.velocity.weights();
    for (std::size_t i = 0; i < w.size(); ++i) {
      d += w[i] * std::pow(a.velocity.values[i] - b.velocity.values[i], 2);
      n += w[i] * std::pow(a.velocity.values[i], 2);
    }
    diffs.push_back(std::sqrt(d / n));
  }
  CHECK(diffs[0] / diffs[1] >= 6.0);
}

TEST_CASE("reduced dimension one is degenerate for z3-independent forcing") {
  // In a vertical cross-section any forcing f1(z1) is a gradient, so the
  // pressure absorbs it and both models are at rest.
  const auto g = box(16, 1, 8);
  for (const char* preset : {"rotational", "trig_gradient"}) {
    const auto f = make_forcing({preset, {1.0}}, g->domain());
    const auto lim = solve_limit(g, f, make(1.5, 0.0, 1.0));
    CHECK(norm(lim.velocity, 2.0, Restriction::Omega) <= 1e-9);
    const auto full = solve_full(g, f, make(1.5, 0.0, 0.1));
    CHECK(max_abs(full.velocity.values) <= 1e-12);
  }
}

TEST_CASE("full-order solves need a constant gap") {
  const auto d = ReducedDomain::rectangle(1.0, 1.0, 4, 4);
  const auto g = std::make_shared<const Grid3>(HeightField(d, make_height({"bump", {1.0, 0.2}}, d)), 3);
  CHECK_THROWS_AS(solve_full(g, make_forcing({"rotational", {1.0}}, d), make(1.5, 0.0, 0.1)),
                  UsageError);
}
