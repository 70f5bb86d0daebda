#include "thinslip/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "thinslip/errors.hpp"

namespace thinslip {

namespace {

void require_coeffs(const Preset& p, std::size_t n) {
  if (p.coeffs.size() != n) {
    std::ostringstream os;
    os << "preset '" << p.key << "' expects " << n << " coefficients, got "
       << p.coeffs.size();
    throw ParameterError(os.str());
  }
}

}  // namespace

ReducedDomain ReducedDomain::interval(double lx, int nx) {
  ReducedDomain d{1, lx, 1.0, nx, 1};
  d.validate();
  return d;
}

ReducedDomain ReducedDomain::rectangle(double lx, double ly, int nx, int ny) {
  ReducedDomain d{2, lx, ly, nx, ny};
  d.validate();
  return d;
}

void ReducedDomain::validate() const {
  if (dim != 1 && dim != 2) throw ParameterError("reduced dimension must be 1 or 2");
  if (!(lx > 0.0) || (dim == 2 && !(ly > 0.0))) {
    throw ParameterError("domain extents must be > 0");
  }
  if (nx < 2 || (dim == 2 && ny < 2)) throw ParameterError("need at least 2 cells per axis");
  if (dim == 1 && ny != 1) throw ParameterError("dim = 1 requires ny = 1");
}

ScalarFn make_height(const Preset& preset, const ReducedDomain& domain) {
  const double pi = std::numbers::pi;
  const double lx = domain.lx;
  const double ly = domain.ly;
  const bool two_d = domain.dim == 2;
  if (preset.key == "constant") {
    require_coeffs(preset, 1);
    const double h0 = preset.coeffs[0];
    return [h0](double, double) { return h0; };
  }
  if (preset.key == "affine") {
    require_coeffs(preset, 3);
    const double a = preset.coeffs[0], b1 = preset.coeffs[1], b2 = preset.coeffs[2];
    return [a, b1, b2](double z1, double z2) { return a + b1 * z1 + b2 * z2; };
  }
  if (preset.key == "bump") {
    require_coeffs(preset, 2);
    const double h0 = preset.coeffs[0], amp = preset.coeffs[1];
    return [=](double z1, double z2) {
      const double sy = two_d ? std::sin(pi * z2 / ly) : 1.0;
      return h0 + amp * std::sin(pi * z1 / lx) * sy;
    };
  }
  throw ParameterError("unknown height preset '" + preset.key + "'");
}

VectorFn make_forcing(const Preset& preset, const ReducedDomain& domain) {
  const double pi = std::numbers::pi;
  const double lx = domain.lx;
  const double ly = domain.ly;
  const bool two_d = domain.dim == 2;
  if (preset.key == "zero") {
    require_coeffs(preset, 0);
    return [](double, double) { return Vec2::Zero().eval(); };
  }
  if (preset.key == "constant") {
    require_coeffs(preset, 2);
    const Vec2 f(preset.coeffs[0], two_d ? preset.coeffs[1] : 0.0);
    return [f](double, double) { return f; };
  }
  if (preset.key == "rotational") {
    require_coeffs(preset, 1);
    const double amp = preset.coeffs[0];
    return [=](double z1, double z2) {
      return Vec2(-amp * (z2 - 0.5 * ly), two_d ? amp * (z1 - 0.5 * lx) : 0.0);
    };
  }
  if (preset.key == "trig_gradient") {
    require_coeffs(preset, 1);
    const double amp = preset.coeffs[0];
    return [=](double z1, double z2) {
      const double ax = pi / lx, ay = pi / ly;
      if (!two_d) return Vec2(amp * ax * std::cos(ax * z1), 0.0);
      return Vec2(amp * ax * std::cos(ax * z1) * std::sin(ay * z2),
                  amp * ay * std::sin(ax * z1) * std::cos(ay * z2));
    };
  }
  throw ParameterError("unknown forcing preset '" + preset.key + "'");
}

HeightField::HeightField(ReducedDomain domain, const ScalarFn& h) : domain_(domain) {
  domain_.validate();
  cells_.resize(domain_.num_cells());
  for (int j = 0; j < domain_.ny; ++j) {
    for (int i = 0; i < domain_.nx; ++i) {
      const double v = h(domain_.xc(i), domain_.yc(j));
      if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << "height must be > 0, got " << v << " at cell (" << i << ", " << j << ")";
        throw ParameterError(os.str());
      }
      cells_[domain_.cell(i, j)] = v;
    }
  }
  derive_faces();
}

HeightField HeightField::constant(ReducedDomain domain, double h0) {
  return HeightField(domain, [h0](double, double) { return h0; });
}

void HeightField::derive_faces() {
  const int nx = domain_.nx, ny = domain_.ny;
  xfaces_.assign((nx + 1) * ny, 0.0);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const int l = std::max(i - 1, 0), r = std::min(i, nx - 1);
      xfaces_[j * (nx + 1) + i] = 0.5 * (cell(l, j) + cell(r, j));
    }
  }
  yfaces_.clear();
  if (domain_.dim == 2) {
    yfaces_.assign(nx * (ny + 1), 0.0);
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int b = std::max(j - 1, 0), t = std::min(j, ny - 1);
        yfaces_[j * nx + i] = 0.5 * (cell(i, b) + cell(i, t));
      }
    }
  }
}

double HeightField::min() const { return *std::min_element(cells_.begin(), cells_.end()); }
double HeightField::max() const { return *std::max_element(cells_.begin(), cells_.end()); }

bool HeightField::is_constant() const {
  return std::all_of(cells_.begin(), cells_.end(),
                     [&](double v) { return v == cells_.front(); });
}

Grid3::Grid3(HeightField hf, int nz) : hf_(std::move(hf)), nz_(nz) {
  if (nz_ < 2) throw ParameterError("need at least 2 vertical cells");
  flat_ = hf_.is_constant();
  dof_of_.assign(n_velocity(), -1);
  interior_.reserve(n_velocity());
  for (int k = 0; k < nz_; ++k)
    for (int j = 0; j < ny(); ++j)
      for (int i = 0; i <= nx(); ++i)
        if (i > 0 && i < nx()) interior_.push_back(u1(i, j, k));
  if (dim() == 2) {
    for (int k = 0; k < nz_; ++k)
      for (int j = 0; j <= ny(); ++j)
        for (int i = 0; i < nx(); ++i)
          if (j > 0 && j < ny()) interior_.push_back(u2(i, j, k));
  }
  for (int k = 0; k <= nz_; ++k)
    for (int j = 0; j < ny(); ++j)
      for (int i = 0; i < nx(); ++i)
        if (k > 0 && k < nz_) interior_.push_back(u3(i, j, k));
  for (std::size_t d = 0; d < interior_.size(); ++d) dof_of_[interior_[d]] = static_cast<int>(d);
}

}  // namespace thinslip
