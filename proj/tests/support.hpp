#pragma once

#include <memory>
#include <random>

#include "thinslip/geometry.hpp"

namespace testing {

inline std::shared_ptr<const thinslip::Grid3> box(int nx, int ny, int nz, double h = 1.0) {
  using namespace thinslip;
  const ReducedDomain d = ny == 1 ? ReducedDomain::interval(1.0, nx)
                                  : ReducedDomain::rectangle(1.0, 1.0, nx, ny);
  return std::make_shared<const Grid3>(HeightField::constant(d, h), nz);
}

inline double rel(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace testing
