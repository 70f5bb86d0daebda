#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "thinslip/errors.hpp"
#include "thinslip/field.hpp"
#include "thinslip/operators.hpp"

using namespace thinslip;
using testing::box;

TEST_CASE("classify_regime examples") {
  const Regime a = classify_regime(1.5, 0.0);
  CHECK(a.kind == RegimeKind::Critical);
  CHECK(a.gamma_star == 0.0);
  const Regime b = classify_regime(2.0, -1.0);
  CHECK(b.kind == RegimeKind::Critical);
  CHECK(b.gamma_star == -1.0);
  const Regime c = classify_regime(1.2, 1.0);
  CHECK(c.kind == RegimeKind::Supercritical);
  CHECK(c.gamma_star == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(classify_regime(1.5, -0.5).kind == RegimeKind::Subcritical);
  CHECK_THROWS_AS(classify_regime(1.0, 0.0), ParameterError);
  CHECK_THROWS_AS(classify_regime(2.5, 0.0), ParameterError);
}

TEST_CASE("classify_regime is exact at gamma = 3 - 2s") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1.0, 2.0);
  for (int n = 0; n < 10000; ++n) {
    const double s = u(rng);
    if (s == 1.0) continue;
    CHECK(classify_regime(s, 3.0 - 2.0 * s).kind == RegimeKind::Critical);
  }
}

TEST_CASE("FluidParams validation") {
  FluidParams p;
  CHECK_NOTHROW(p.validate());
  p.nu = 0.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = {};
  p.K << 1.0, 0.3, 0.2, 1.0;
  CHECK_THROWS_WITH_AS(p.validate(), "K must be symmetric", ParameterError);
  p.K << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p = {};
  p.delta_reg = 0.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p.s = 2.0;
  CHECK_NOTHROW(p.validate());
  p = {};
  p.s = 1.01;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  CHECK(navier_tensor(4.0).isApprox(2.0 * Mat2::Identity()));
}

TEST_CASE("height field faces average adjacent cells") {
  const auto d = ReducedDomain::rectangle(2.0, 1.0, 5, 4);
  const HeightField hf(d, make_height({"affine", {1.0, 0.3, -0.2}}, d));
  for (int j = 0; j < d.ny; ++j) {
    CHECK(hf.xface(0, j) == hf.cell(0, j));
    CHECK(hf.xface(d.nx, j) == hf.cell(d.nx - 1, j));
    for (int i = 1; i < d.nx; ++i)
      CHECK(hf.xface(i, j) == doctest::Approx(0.5 * (hf.cell(i - 1, j) + hf.cell(i, j))));
  }
  for (int i = 0; i < d.nx; ++i) {
    CHECK(hf.yface(i, 0) == hf.cell(i, 0));
    CHECK(hf.yface(i, d.ny) == hf.cell(i, d.ny - 1));
  }
  CHECK(hf.min() > 0.0);
  CHECK_FALSE(hf.is_constant());
  CHECK_THROWS_AS(HeightField(d, make_height({"affine", {0.1, -1.0, 0.0}}, d)), ParameterError);
}

TEST_CASE("grid constrains walls and keeps the bottom trace free") {
  const auto g = box(4, 3, 5);
  const auto& dof = g->dof_of();
  for (int k = 0; k < g->nz(); ++k)
    for (int j = 0; j < g->ny(); ++j) {
      CHECK(dof[g->u1(0, j, k)] < 0);
      CHECK(dof[g->u1(g->nx(), j, k)] < 0);
      CHECK(dof[g->u1(1, j, k)] >= 0);
    }
  for (int j = 0; j < g->ny(); ++j)
    for (int i = 0; i < g->nx(); ++i) {
      CHECK(dof[g->u3(i, j, 0)] < 0);
      CHECK(dof[g->u3(i, j, g->nz())] < 0);
    }
  CHECK(g->n_trace() == 5 * 3 + 4 * 4);
}

TEST_CASE("D_eps examples") {
  const auto g = box(4, 4, 6);
  const Field zero = Field::zeros(FieldKind::VelocityFull, g);
  CHECK(apply_Deps(zero, 0.3).l2_norm() == 0.0);

  const Field v = Field::sample_velocity(FieldKind::VelocityFull, g, [](double, double, double z) {
    return Vec3{z, 0.0, 0.0};
  });
  const TensorField D = apply_Deps(v, 0.5);
  const TensorComponent& d13 = D.at(0, 2);
  // Rows are ordered like the staggered (x-face, z-edge) locations; the
  // interior ones see the linear profile.
  int checked = 0;
  const int nx = g->nx(), ny = g->ny();
  for (int k = 1; k < g->nz(); ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 1; i < nx; ++i) {
        const int row = (k * ny + j) * (nx + 1) + i;
        CHECK(d13.values[row] == doctest::Approx(2.0).epsilon(1e-12));
        ++checked;
      }
  CHECK(checked > 0);
  CHECK_THROWS_AS(apply_Deps(v, 0.0), ParameterError);
}

TEST_CASE("D_eps at eps = 1 is the unscaled gradient") {
  const auto g = box(3, 4, 3);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  Field v = Field::zeros(FieldKind::VelocityFull, g);
  for (auto& x : v.values) x = n(rng);
  for (auto& x : v.trace) x = n(rng);
  const TensorField a = apply_Deps(v, 1.0), b = apply_Deps(v, 0.25);
  for (std::size_t c = 0; c < a.components.size(); ++c) {
    const double f = a.components[c].col == 2 ? 4.0 : 1.0;
    for (std::size_t r = 0; r < a.components[c].values.size(); ++r)
      CHECK(b.components[c].values[r] == doctest::Approx(f * a.components[c].values[r]).epsilon(1e-13));
  }
}

TEST_CASE("div_eps examples") {
  const auto g = box(5, 4, 6);
  const Field c = Field::sample_velocity(FieldKind::VelocityFull, g, [](double, double, double) {
    return Vec3{1.3, -0.4, 0.0};
  });
  // Constants are only admissible away from the walls; compare interior cells.
  const Field dc = apply_diveps(c, 0.7);
  for (int k = 0; k < g->nz(); ++k)
    for (int j = 0; j < g->ny(); ++j)
      for (int i = 0; i < g->nx(); ++i) CHECK(std::abs(dc.values[g->cell(i, j, k)]) < 1e-12);

  const Field v = Field::sample_velocity(FieldKind::VelocityFull, g, [](double, double, double z) {
    return Vec3{0.0, 0.0, z};
  });
  const Field dv = apply_diveps(v, 0.25);
  for (double x : dv.values) CHECK(x == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("div_eps is minus the transpose of grad_eps up to 16^3") {
  for (int n : {2, 5, 9, 16}) {
    for (double eps : {1.0, 0.3}) {
      const auto g = box(n, n, n);
      const Eigen::SparseMatrix<double> Dv = divergence_matrix(*g, eps);
      const Eigen::SparseMatrix<double> Gt = Eigen::SparseMatrix<double>(gradient_matrix(*g, eps)).transpose();
      const Eigen::SparseMatrix<double> sum = Dv + Gt;
      double worst = 0.0;
      for (int k = 0; k < sum.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sum, k); it; ++it)
          worst = std::max(worst, std::abs(it.value()));
      CHECK(worst <= 1e-12);
    }
  }
}

TEST_CASE("norm examples") {
  const auto g = box(6, 6, 8);
  const Field one = Field::sample_pressure(FieldKind::PressureFull, g,
                                           [](double, double, double) { return 1.0; });
  CHECK(norm(one, 2.0, Restriction::Omega) == doctest::Approx(1.0).epsilon(1e-12));

  Field t = Field::zeros(FieldKind::VelocityFull, g);
  for (int j = 0; j < g->ny(); ++j)
    for (int i = 0; i <= g->nx(); ++i) t.trace[g->t1(i, j)] = 2.0;
  CHECK(norm(t, 2.0, Restriction::Gamma0) == doctest::Approx(2.0).epsilon(1e-12));

  double prev = 1.0;
  for (int nz : {4, 8, 16}) {
    const auto gz = box(4, 4, nz);
    const Field z = Field::sample_pressure(FieldKind::PressureFull, gz,
                                           [](double, double, double z3) { return z3; });
    const double err = std::abs(norm(z, 2.0, Restriction::Omega) - 1.0 / std::sqrt(3.0));
    CHECK(err <= 0.1 / (nz * nz));
    CHECK(err < prev);
    prev = err;
  }
  CHECK_THROWS_AS(norm(one, 2.0, Restriction::Gamma0), UsageError);
}

TEST_CASE("norms are 1-homogeneous") {
  const auto g = box(5, 4, 4);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  for (int rep = 0; rep < 20; ++rep) {
    Field v = Field::zeros(FieldKind::VelocityFull, g);
    for (auto& x : v.values) x = n(rng);
    for (auto& x : v.trace) x = n(rng);
    const double c = n(rng);
    Field w = v;
    for (auto& x : w.values) x *= c;
    for (auto& x : w.trace) x *= c;
    for (double p : {2.0, 1.5}) {
      for (auto where : {Restriction::Omega, Restriction::Gamma0}) {
        const double a = norm(w, p, where), b = std::abs(c) * norm(v, p, where);
        CHECK(std::abs(a - b) <= 1e-12 * b);
      }
    }
  }
}

TEST_CASE("zero-mean projection is idempotent") {
  const auto g = box(4, 5, 3);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(3.0, 2.0);
  Field p = Field::zeros(FieldKind::PressureFull, g);
  for (auto& x : p.values) x = n(rng);
  const Field a = zero_mean(p);
  const Field b = zero_mean(a);
  double mx = 0.0;
  for (double x : a.values) mx = std::max(mx, std::abs(x));
  CHECK(std::abs(weighted_mean(a)) < 1e-12 * mx);
  CHECK(a.zero_mean);
  for (std::size_t i = 0; i < a.values.size(); ++i)
    CHECK(std::abs(a.values[i] - b.values[i]) <= 1e-14 * mx);
}
