#include <random>

#include <omp.h>

#include "doctest.h"
#include "support.hpp"
#include "thinslip/kernels.hpp"

using namespace thinslip;
using testing::box;

TEST_CASE("stencil application: serial and parallel agree bitwise") {
  const auto g = box(9, 7, 5);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<double> v(g->n_velocity()), t(g->n_trace());
  for (auto& x : v) x = n(rng);
  for (auto& x : t) x = n(rng);
  for (const auto& st : {deps_stencil(*g, 0.1), div_stencil(*g, 0.1)}) {
    std::vector<double> a(st.rows()), b(st.rows());
    kernels::apply_stencil_serial(st, v, t, a);
    for (int threads : {1, 2, 4}) {
      omp_set_num_threads(threads);
      kernels::apply_stencil_omp(st, v, t, b);
      CHECK(a == b);
    }
  }
}

TEST_CASE("weighted power sums are thread-count independent") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(10007), w(10007);
  for (auto& v : x) v = n(rng);
  for (auto& v : w) v = u(rng);
  for (double p : {1.5, 2.0}) {
    const double a = kernels::weighted_power_sum_serial(x, w, p);
    for (int threads : {1, 3}) {
      omp_set_num_threads(threads);
      CHECK(kernels::weighted_power_sum_omp(x, w, p) == a);
    }
  }
}

TEST_CASE("batched profile solves agree") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.5, 2.0);
  std::vector<kernels::ColumnInput> cols(500);
  for (auto& c : cols) c = {Vec2(n(rng), n(rng)), u(rng)};
  FluidParams p;
  p.s = 1.5;
  for (double gamma : {-1.0, 0.0, 1.0}) {
    p.gamma = gamma;
    const auto a = kernels::solve_profiles_serial(cols, p, p.regime(), 1e-6);
    omp_set_num_threads(2);
    const auto b = kernels::solve_profiles_omp(cols, p, p.regime(), 1e-6);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].B == b[i].B);
      CHECK(a[i].flux == b[i].flux);
    }
  }
}
