#pragma once

#include "thinslip/geometry.hpp"

namespace thinslip {

/// Regularization shared by the full-order and limit solvers: params.delta_reg
/// when set, otherwise default_delta of the largest forcing magnitude and gap.
double problem_delta(const FluidParams& params, const HeightField& hf, const VectorFn& forcing);

/// Effective anisotropy tensor: in reduced dimension 1 only K(0, 0) acts.
Mat2 effective_K(const FluidParams& params, int dim);

}  // namespace thinslip
