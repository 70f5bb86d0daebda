#include <random>

#include <benchmark/benchmark.h>

#include "thinslip/kernels.hpp"

using namespace thinslip;

namespace {

const Grid3& grid() {
  static const Grid3 g(HeightField::constant(ReducedDomain::rectangle(1.0, 1.0, 48, 48), 1.0), 24);
  return g;
}

std::vector<double> noise(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

template <bool Parallel>
void BM_deps_stencil(benchmark::State& state) {
  const Grid3& g = grid();
  const LinearStencil st = deps_stencil(g, 0.1);
  const auto v = noise(g.n_velocity(), 1), t = noise(g.n_trace(), 2);
  std::vector<double> out(st.rows());
  for (auto _ : state) {
    if constexpr (Parallel) kernels::apply_stencil_omp(st, v, t, out);
    else kernels::apply_stencil_serial(st, v, t, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * st.rows());
}

template <bool Parallel>
void BM_power_sum(benchmark::State& state) {
  const auto x = noise(1 << 20, 3), w = noise(1 << 20, 4);
  for (auto _ : state) {
    double s = Parallel ? kernels::weighted_power_sum_omp(x, w, 1.5)
                        : kernels::weighted_power_sum_serial(x, w, 1.5);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * x.size());
}

template <bool Parallel>
void BM_profiles(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  std::vector<kernels::ColumnInput> cols(20000);
  for (auto& c : cols) c = {Vec2(d(rng), d(rng)), 1.0};
  FluidParams p;
  p.s = 1.5;
  p.gamma = 0.0;
  for (auto _ : state) {
    auto r = Parallel ? kernels::solve_profiles_omp(cols, p, p.regime(), 1e-6)
                      : kernels::solve_profiles_serial(cols, p, p.regime(), 1e-6);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * cols.size());
}

}  // namespace

BENCHMARK(BM_deps_stencil<false>)->Name("deps_stencil/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_deps_stencil<true>)->Name("deps_stencil/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_power_sum<false>)->Name("power_sum/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_power_sum<true>)->Name("power_sum/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_profiles<false>)->Name("critical_profiles/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_profiles<true>)->Name("critical_profiles/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
