#pragma once

#include <span>
#include <vector>

#include "thinslip/operators.hpp"
#include "thinslip/profile.hpp"

namespace thinslip::kernels {

/// out[r] = sum_c coeff * input(c) for every stencil row.
void apply_stencil_serial(const LinearStencil& st, std::span<const double> values,
                          std::span<const double> trace, std::span<double> out);
void apply_stencil_omp(const LinearStencil& st, std::span<const double> values,
                       std::span<const double> trace, std::span<double> out);

/// Elementwise w * |x|^p, summed serially in index order so the result does
/// not depend on the thread count.
double weighted_power_sum_serial(std::span<const double> x, std::span<const double> w,
                                 double p);
double weighted_power_sum_omp(std::span<const double> x, std::span<const double> w,
                              double p);

struct ColumnInput {
  Vec2 G;
  double h;
};

/// Independent per-column profile solves over a batch of reduced-grid points.
std::vector<ProfileSolution> solve_profiles_serial(std::span<const ColumnInput> columns,
                                                   const FluidParams& params, Regime regime,
                                                   double delta);
std::vector<ProfileSolution> solve_profiles_omp(std::span<const ColumnInput> columns,
                                                const FluidParams& params, Regime regime,
                                                double delta);

}  // namespace thinslip::kernels
