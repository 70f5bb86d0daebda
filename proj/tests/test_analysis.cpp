#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "thinslip/analysis.hpp"
#include "thinslip/errors.hpp"

using namespace thinslip;
using testing::box;

TEST_CASE("fit_slope examples") {
  auto a = fit_slope({{0.1, 0.01}, {0.05, 0.0025}});
  CHECK(a.slope == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(a.residual <= 1e-13);
  auto b = fit_slope({{0.1, 3.0}, {0.05, 3.0}});
  CHECK(std::abs(b.slope) <= 1e-14);
  auto c = fit_slope({{0.2, 0.2}, {0.1, 0.1}, {0.05, 0.05}});
  CHECK(c.slope == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(c.residual <= 1e-13);
  CHECK_THROWS_AS(fit_slope({{0.1, 1.0}}), UsageError);
  CHECK_THROWS_AS(fit_slope({{0.1, 1.0}, {0.05, 0.0}}), DataError);
  CHECK_THROWS_AS(fit_slope({{0.1, 1.0}, {0.05, -2.0}}), DataError);
}

TEST_CASE("fit_slope is exact on power laws") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> e(-3.0, 3.0), c(0.1, 10.0);
  for (int n = 0; n < 200; ++n) {
    const double k = e(rng), C = c(rng);
    std::vector<std::pair<double, double>> pts;
    for (double eps : {0.4, 0.2, 0.1, 0.05}) pts.push_back({eps, C * std::pow(eps, k)});
    const auto f = fit_slope(pts);
    CHECK(std::abs(f.slope - k) <= 1e-12);
    CHECK(f.residual <= 1e-12);
  }
}

TEST_CASE("verify_apriori on synthetic sweeps") {
  FluidParams p;
  p.s = 1.5;
  p.gamma = 0.0;
  const double wexp = (3.0 - p.gamma) / p.s;
  std::vector<NormBundle> good;
  for (double eps : {0.2, 0.1, 0.05})
    good.push_back({eps, eps * eps, eps, std::pow(eps, wexp), 1.0, eps * eps * eps});
  const auto rep = verify_apriori(good, p);
  CHECK(rep.all_pass);
  CHECK(rep.verdict == "pass");
  CHECK(rep.u_slope.slope == doctest::Approx(2.0));
  CHECK(rep.u3_slope.slope == doctest::Approx(3.0));
  CHECK(rep.checks.size() == 4u);

  auto bad = good;
  for (auto& nb : bad) nb.u_l2 = nb.eps;
  const auto rb = verify_apriori(bad, p);
  CHECK_FALSE(rb.all_pass);
  CHECK_FALSE(rb.checks[0].pass);
  CHECK(rb.checks[1].pass);

  auto zero = good;
  zero[1].u_l2 = 0.0;
  CHECK(verify_apriori(zero, p).verdict == "identically zero");
  good.pop_back();
  CHECK_THROWS_AS(verify_apriori(good, p), UsageError);
}

namespace {

/// Wall and bulk samples built from limit profiles only.
TraceSample synthetic(double gamma, double eps, const Mat2& K, double delta) {
  FluidParams p;
  p.s = 1.5;
  p.gamma = gamma;
  p.K = K;
  p.nu = 1.3;
  TraceSample ts;
  ts.eps = eps;
  ts.nu = p.nu;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n;
  const double h = 1.0;
  double uu = 0.0, dd = 0.0;
  for (int c = 0; c < 30; ++c) {
    const Vec2 G(n(rng), n(rng));
    const ProfileSolution pr = solve_profile(G, h, p, p.regime(), delta);
    ts.b.push_back(pr.B);
    ts.t.push_back(p.nu * pr.shear(0.0));
    ts.w.push_back(Vec2(1.0, 1.0));
    for (int k = 0; k < 50; ++k) {
      const double z = (k + 0.5) * h / 50;
      uu += pr.velocity(z).squaredNorm() / 50;
      dd += pr.shear(z).squaredNorm() / 50;
    }
  }
  ts.u_l2 = std::sqrt(uu);
  ts.dz_u_l2 = std::sqrt(dd);
  return ts;
}

}  // namespace

TEST_CASE("classifier recovers the regime of synthetic profiles") {
  Mat2 K;
  K << 1.1, 0.2, 0.2, 0.9;
  const double delta = 1e-6;
  FluidParams p;
  p.s = 1.5;
  p.K = K;
  const std::pair<double, RegimeKind> cases[] = {{-1.0, RegimeKind::Subcritical},
                                                 {0.0, RegimeKind::Critical},
                                                 {1.0, RegimeKind::Supercritical}};
  for (const auto& [gamma, kind] : cases) {
    std::vector<TraceSample> sweep;
    for (double eps : {0.2, 0.1, 0.05}) sweep.push_back(synthetic(gamma, eps, K, delta));
    p.gamma = gamma;
    const auto v = regime_identify(sweep, p, delta);
    REQUIRE(v.kind.has_value());
    CHECK(*v.kind == kind);
    CHECK(v.verdict == std::string(to_string(kind)));
  }
}

TEST_CASE("classifier edge cases") {
  FluidParams p;
  TraceSample z;
  z.eps = 0.1;
  CHECK(regime_identify({z, z, z}, p, 1e-6).verdict == "zero-flow, indeterminate");
  CHECK_THROWS_AS(regime_identify({}, p, 1e-6), UsageError);

  // Indicators that grow toward small eps above the floor do not pass.
  std::vector<TraceSample> s;
  for (double eps : {0.2, 0.1, 0.05}) {
    TraceSample t;
    t.eps = eps;
    t.b = {Vec2(0.05 / eps * 0.02, 0.0)};
    t.t = {Vec2(1.0, 0.0)};
    t.w = {Vec2(1.0, 1.0)};
    t.u_l2 = 1.0;
    t.dz_u_l2 = 1.0;
    s.push_back(t);
  }
  const auto v = regime_identify(s, p, 1e-6);
  CHECK(v.indicators.front().sub < v.indicators.back().sub);
  CHECK_FALSE(v.kind.has_value());
  CHECK(v.verdict == "unidentified");
}

TEST_CASE("compare_limit behaves as a metric") {
  const auto g = box(4, 3, 3);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  auto random_field = [&] {
    Field f = Field::zeros(FieldKind::VelocityFull, g);
    for (auto& x : f.values) x = n(rng);
    return f;
  };
  const Field a = random_field();
  CHECK(field_distance(a, 1.0, a).l2 == 0.0);
  CHECK(field_distance(a, 1.0, a).dz == 0.0);

  // Constant perturbation of every component on a unit-measure Omega.
  Field c = Field::zeros(FieldKind::VelocityFull, g);
  for (int i = 0; i < g->off_u2(); ++i) c.values[i] = 1e-3;
  Field zero = Field::zeros(FieldKind::VelocityFull, g);
  CHECK(field_distance(c, 1.0, zero).l2 == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(field_distance(c, 1.0, zero).dz == doctest::Approx(0.0));

  for (int rep = 0; rep < 50; ++rep) {
    const Field x = random_field(), y = random_field(), z = random_field();
    const double xy = field_distance(x, 1.0, y).l2, yx = field_distance(y, 1.0, x).l2;
    const double yz = field_distance(y, 1.0, z).l2, xz = field_distance(x, 1.0, z).l2;
    CHECK(std::abs(xy - yx) <= 1e-12 * xy);
    CHECK(xz <= xy + yz + 1e-12);
    CHECK(xy > 0.0);
  }
  const auto other = box(4, 4, 3);
  CHECK_THROWS_AS(field_distance(a, 1.0, Field::zeros(FieldKind::VelocityFull, other)), UsageError);
}
