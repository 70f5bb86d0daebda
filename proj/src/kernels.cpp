#include "thinslip/kernels.hpp"

#include <cmath>
#include <exception>

namespace thinslip::kernels {

namespace {

inline double stencil_row(const LinearStencil& st, int r, std::span<const double> values,
                          std::span<const double> trace) {
  double acc = 0.0;
  for (int n = st.row_ptr[r]; n < st.row_ptr[r + 1]; ++n) {
    const int c = st.col[n];
    acc += st.coeff[n] * (c < st.n_values ? values[c] : trace[c - st.n_values]);
  }
  return acc;
}

inline double power_term(double x, double w, double p) {
  const double a = std::abs(x);
  return w * (p == 2.0 ? a * a : std::pow(a, p));
}

}  // namespace

void apply_stencil_serial(const LinearStencil& st, std::span<const double> values,
                          std::span<const double> trace, std::span<double> out) {
  for (int r = 0; r < st.rows(); ++r) out[r] = stencil_row(st, r, values, trace);
}

void apply_stencil_omp(const LinearStencil& st, std::span<const double> values,
                       std::span<const double> trace, std::span<double> out) {
  const int rows = st.rows();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < rows; ++r) out[r] = stencil_row(st, r, values, trace);
}

double weighted_power_sum_serial(std::span<const double> x, std::span<const double> w,
                                 double p) {
  double sum = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) sum += power_term(x[n], w[n], p);
  return sum;
}

double weighted_power_sum_omp(std::span<const double> x, std::span<const double> w,
                              double p) {
  const long n = static_cast<long>(x.size());
  std::vector<double> terms(x.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) terms[i] = power_term(x[i], w[i], p);
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

std::vector<ProfileSolution> solve_profiles_serial(std::span<const ColumnInput> columns,
                                                   const FluidParams& params, Regime regime,
                                                   double delta) {
  std::vector<ProfileSolution> out;
  out.reserve(columns.size());
  for (const auto& c : columns) out.push_back(solve_profile(c.G, c.h, params, regime, delta));
  return out;
}

std::vector<ProfileSolution> solve_profiles_omp(std::span<const ColumnInput> columns,
                                                const FluidParams& params, Regime regime,
                                                double delta) {
  const long n = static_cast<long>(columns.size());
  std::vector<ProfileSolution> out(columns.size());
  std::vector<std::exception_ptr> errors(columns.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = solve_profile(columns[i].G, columns[i].h, params, regime, delta);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace thinslip::kernels
