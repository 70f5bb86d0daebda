#include "thinslip/problem.hpp"

#include <algorithm>

#include "thinslip/profile.hpp"

namespace thinslip {

double problem_delta(const FluidParams& params, const HeightField& hf, const VectorFn& forcing) {
  if (params.delta_reg) return *params.delta_reg;
  const ReducedDomain& d = hf.domain();
  double fmax = 0.0;
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) fmax = std::max(fmax, forcing(d.xc(i), d.yc(j)).norm());
  return default_delta(Vec2(fmax, 0.0), hf.max(), params.nu);
}

Mat2 effective_K(const FluidParams& params, int dim) {
  if (dim == 2) return params.K;
  return params.K(0, 0) * Mat2::Identity();
}

}  // namespace thinslip
