#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "thinslip/errors.hpp"
#include "thinslip/profile.hpp"

using namespace thinslip;
using testing::rel;

namespace {

FluidParams params_for(double s, double gamma, double nu = 1.0, Mat2 K = Mat2::Identity()) {
  FluidParams p;
  p.s = s;
  p.gamma = gamma;
  p.nu = nu;
  p.K = K;
  return p;
}

ProfileSolution solve_in(const FluidParams& p, const Vec2& G, double h) {
  return solve_profile(G, h, p, p.regime());
}

}  // namespace

TEST_CASE("profile examples") {
  const Vec2 G(1.0, 0.0);
  SUBCASE("subcritical") {
    const auto sol = solve_in(params_for(1.5, -1.0), G, 1.0);
    CHECK(sol.A[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sol.B[0] == 0.0);
    CHECK(sol.flux[0] == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  }
  SUBCASE("supercritical") {
    const auto sol = solve_in(params_for(1.5, 1.0), G, 1.0);
    CHECK(sol.A[0] == 0.0);
    CHECK(sol.B[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sol.flux[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("navier") {
    const auto sol = solve_in(params_for(2.0, -1.0), G, 1.0);
    CHECK(sol.B[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(sol.A[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(sol.flux[0] == doctest::Approx(5.0 / 24.0).epsilon(1e-14));
  }
  SUBCASE("zero drive") {
    for (double gamma : {-1.0, 0.0, 1.0}) {
      const auto sol = solve_in(params_for(1.5, gamma), Vec2::Zero(), 1.0);
      CHECK(sol.A.isZero(0.0));
      CHECK(sol.B.isZero(0.0));
      CHECK(sol.flux.isZero(0.0));
    }
  }
}

TEST_CASE("closed-form fluxes over random draws") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U(0.1, 10.0), S(-5.0, 5.0);
  for (int n = 0; n < 50; ++n) {
    const Vec2 G(S(rng), S(rng));
    const double h = U(rng), nu = U(rng), lambda = U(rng);
    const auto sub = solve_in(params_for(1.5, -1.0, nu), G, h);
    const auto sup = solve_in(params_for(1.5, 1.0, nu), G, h);
    const auto nav = solve_in(params_for(2.0, -1.0, nu, navier_tensor(lambda)), G, h);
    const Vec2 q_sub = G * (h * h * h / (12.0 * nu));
    const Vec2 q_sup = G * (h * h * h / (3.0 * nu));
    const Vec2 B = G * (h * h / (2.0 * nu)) / (1.0 + lambda * h / nu);
    const Vec2 q_nav = -G * (h * h * h / (6.0 * nu)) + (lambda / nu) * B * (h * h / 2.0) + B * h;
    CHECK((sub.flux - q_sub).norm() <= 1e-12 * q_sub.norm());
    CHECK((sup.flux - q_sup).norm() <= 1e-12 * q_sup.norm());
    CHECK((nav.flux - q_nav).norm() <= 1e-12 * q_nav.norm());
  }
}

TEST_CASE("profile invariants") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(0.2, 3.0), S(-3.0, 3.0);
  for (int n = 0; n < 40; ++n) {
    const Vec2 G(S(rng), S(rng));
    const double h = U(rng), nu = U(rng);
    Mat2 K;
    K << U(rng), 0.1, 0.1, U(rng);
    for (double gamma : {-1.0, 0.0, 1.0}) {
      const FluidParams p = params_for(1.5, gamma, nu, K);
      const auto sol = solve_in(p, G, h);
      const double scale = G.norm() * h * h / (2.0 * nu);
      CHECK(sol.velocity(h).norm() <= 1e-12 * std::max(1.0, scale));
      if (gamma < 0.0) CHECK(sol.B.isZero(0.0));
      if (gamma > 0.0) CHECK(sol.A.isZero(0.0));
      if (gamma == 0.0) {
        const double d = default_delta(G, h, nu);
        CHECK(closure_residual(sol.B, G, h, p, d).norm() <= 1e-12 * std::max(1.0, scale));
        CHECK(sol.residual <= 1e-12 * std::max(1.0, scale));
      }
    }
  }
}

TEST_CASE("slip_traction examples") {
  const Mat2 I = Mat2::Identity();
  CHECK(slip_traction(Vec2::Zero(), I, 1.5, 1e-6).isZero(0.0));
  const Vec2 B(0.3, -1.7);
  for (double lambda : {0.1, 1.0, 10.0})
    CHECK((slip_traction(B, navier_tensor(lambda), 2.0, 0.0) - lambda * B).norm() <=
          1e-14 * lambda * B.norm());
  const Vec2 t = slip_traction(Vec2(1.0, 0.0), I, 1.5, 0.0);
  CHECK(t[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(t[1] == 0.0);
}

TEST_CASE("slip traction is monotone") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  Mat2 K;
  K << 1.3, 0.4, 0.4, 0.8;
  for (double s : {1.1, 1.5, 1.9, 2.0})
    for (double delta : {0.0, 1e-6, 1e-2})
      for (int rep = 0; rep < 500; ++rep) {
        const Vec2 a(n(rng), n(rng)), b(n(rng), n(rng));
        const double m = (slip_traction(a, K, s, delta) - slip_traction(b, K, s, delta)).dot(a - b);
        CHECK(m >= -1e-12);
      }
}

TEST_CASE("navier continuity of the critical solve") {
  for (double lambda : {0.1, 1.0, 10.0}) {
    const FluidParams p = params_for(2.0, -1.0, 1.3, navier_tensor(lambda));
    const Vec2 G(0.7, -0.2);
    const double h = 0.9;
    const auto sol = solve_in(p, G, h);
    const Vec2 B = G * (h * h / (2.0 * p.nu)) / (1.0 + lambda * h / p.nu);
    CHECK((sol.B - B).norm() <= 1e-12 * B.norm());
  }
}

TEST_CASE("flux ordering across regimes") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.2, 3.0), S(-3.0, 3.0);
  for (int n = 0; n < 50; ++n) {
    const Vec2 G(S(rng), S(rng));
    const double h = U(rng), nu = U(rng);
    const Vec2 dir = G.normalized();
    const double sub = solve_in(params_for(1.5, -1.0, nu), G, h).flux.dot(dir);
    const double crit = solve_in(params_for(1.5, 0.0, nu), G, h).flux.dot(dir);
    const double sup = solve_in(params_for(1.5, 1.0, nu), G, h).flux.dot(dir);
    CHECK(sub <= crit * (1.0 + 1e-14));
    CHECK(crit <= sup * (1.0 + 1e-14));
  }
}

TEST_CASE("newton jacobian matches finite differences") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(0.5, 2.0), A(0.0, 2.0 * M_PI);
  Mat2 K;
  K << 1.1, 0.2, 0.2, 0.7;
  for (double s : {1.1, 1.5, 1.9}) {
    const FluidParams p = params_for(s, 3.0 - 2.0 * s, 1.0, K);
    for (int n = 0; n < 20; ++n) {
      const double r = U(rng), a = A(rng);
      const Vec2 B(r * std::cos(a), r * std::sin(a));
      const Mat2 J = closure_jacobian(B, 0.8, p, 1e-6);
      const double step = 1e-6;
      for (int c = 0; c < 2; ++c) {
        Vec2 e = Vec2::Zero();
        e[c] = step;
        const Vec2 fd = (closure_residual(B + e, Vec2::Zero(), 0.8, p, 1e-6) -
                         closure_residual(B - e, Vec2::Zero(), 0.8, p, 1e-6)) / (2.0 * step);
        CHECK((fd - J.col(c)).norm() <= 1e-6 * J.col(c).norm());
      }
    }
  }
}

TEST_CASE("regularization error shrinks with delta") {
  const FluidParams p = params_for(1.5, 0.0);
  const Vec2 G(2.0, 1.0);
  const double h = 1.0;
  std::vector<Vec2> B;
  const double deltas[] = {1e-4, 5e-5, 2.5e-5};
  for (double d : deltas) B.push_back(solve_profile(G, h, p, p.regime(), d).B);
  // Richardson extrapolation of the last pair, assuming a first-order error.
  const Vec2 B0 = 2.0 * B[2] - B[1];
  const double g0 = (B[0] - B0).norm(), g1 = (B[1] - B0).norm(), g2 = (B[2] - B0).norm();
  CHECK(g1 <= 0.5 * g0 + 1e-15);
  CHECK(g2 <= 0.5 * g1 + 1e-15);
  for (int i = 0; i < 2; ++i) CHECK((B[i] - B[i + 1]).norm() <= deltas[i]);
}

TEST_CASE("profile errors") {
  const FluidParams p = params_for(1.5, 0.0);
  CHECK_THROWS_AS(solve_profile(Vec2(1.0, 0.0), 0.0, p, p.regime()), ParameterError);
  CHECK(default_delta(Vec2::Zero(), 1.0, 1.0) == 1e-6);
  CHECK(default_delta(Vec2(2.0, 0.0), 1.0, 1.0) == doctest::Approx(1e-6));
}
