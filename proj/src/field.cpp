#include "thinslip/field.hpp"

#include "thinslip/errors.hpp"

namespace thinslip {

bool is_velocity(FieldKind kind) {
  return kind == FieldKind::VelocityFull || kind == FieldKind::VelocityReduced;
}

namespace {

std::size_t value_count(FieldKind kind, const Grid3& g) {
  switch (kind) {
    case FieldKind::VelocityFull:
    case FieldKind::VelocityReduced:
      return g.n_velocity();
    case FieldKind::PressureFull:
      return g.n_cells();
    case FieldKind::PressureReduced:
      return g.domain().num_cells();
  }
  return 0;
}

}  // namespace

Field Field::zeros(FieldKind kind, std::shared_ptr<const Grid3> grid) {
  if (!grid) throw UsageError("field needs a grid");
  Field f;
  f.kind = kind;
  f.values.assign(value_count(kind, *grid), 0.0);
  if (is_velocity(kind)) f.trace.assign(grid->n_trace(), 0.0);
  f.grid = std::move(grid);
  return f;
}

Location velocity_location(const Grid3& g, int index) {
  const ReducedDomain& d = g.domain();
  const HeightField& hf = g.height();
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();
  if (index < g.off_u2()) {
    const int i = index % (nx + 1), j = (index / (nx + 1)) % ny, k = index / ((nx + 1) * ny);
    return {0, d.xf(i), d.yc(j), g.zc(k, hf.xface(i, j))};
  }
  if (index < g.off_u3()) {
    const int r = index - g.off_u2();
    const int i = r % nx, j = (r / nx) % (ny + 1), k = r / (nx * (ny + 1));
    return {1, d.xc(i), d.yf(j), g.zc(k, hf.yface(i, j))};
  }
  const int r = index - g.off_u3();
  const int i = r % nx, j = (r / nx) % ny, k = r / (nx * ny);
  return {2, d.xc(i), d.yc(j), k * hf.cell(i, j) / nz};
}

Field Field::sample_velocity(FieldKind kind, std::shared_ptr<const Grid3> grid,
                             const VelocityFn& fn) {
  if (!is_velocity(kind)) throw UsageError("sample_velocity needs a velocity kind");
  Field f = zeros(kind, grid);
  const Grid3& g = *grid;
  for (int n = 0; n < g.n_velocity(); ++n) {
    const Location loc = velocity_location(g, n);
    f.values[n] = fn(loc.z1, loc.z2, loc.z3)[loc.component];
  }
  const ReducedDomain& d = g.domain();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i) f.trace[g.t1(i, j)] = fn(d.xf(i), d.yc(j), 0.0)[0];
  if (g.dim() == 2) {
    for (int j = 0; j <= g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) f.trace[g.t2(i, j)] = fn(d.xc(i), d.yf(j), 0.0)[1];
  }
  return f;
}

Field Field::sample_pressure(FieldKind kind, std::shared_ptr<const Grid3> grid,
                             const std::function<double(double, double, double)>& fn) {
  if (is_velocity(kind)) throw UsageError("sample_pressure needs a pressure kind");
  Field f = zeros(kind, grid);
  const Grid3& g = *grid;
  const ReducedDomain& d = g.domain();
  if (kind == FieldKind::PressureReduced) {
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) f.values[d.cell(i, j)] = fn(d.xc(i), d.yc(j), 0.0);
    return f;
  }
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i)
        f.values[g.cell(i, j, k)] = fn(d.xc(i), d.yc(j), g.zc(k, g.height().cell(i, j)));
  return f;
}

std::vector<double> Field::weights() const {
  const Grid3& g = *grid;
  const ReducedDomain& d = g.domain();
  const HeightField& hf = g.height();
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();
  const double dx = d.dx(), dy = d.dy();
  std::vector<double> w(values.size(), 0.0);
  auto half = [](int i, int n) { return (i == 0 || i == n) ? 0.5 : 1.0; };
  switch (kind) {
    case FieldKind::PressureReduced:
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) w[d.cell(i, j)] = dx * dy * hf.cell(i, j);
      return w;
    case FieldKind::PressureFull:
      for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
          for (int i = 0; i < nx; ++i) w[g.cell(i, j, k)] = dx * dy * hf.cell(i, j) / nz;
      return w;
    default:
      break;
  }
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i <= nx; ++i)
        w[g.u1(i, j, k)] = half(i, nx) * dx * dy * hf.xface(i, j) / nz;
  if (g.dim() == 2) {
    for (int k = 0; k < nz; ++k)
      for (int j = 0; j <= ny; ++j)
        for (int i = 0; i < nx; ++i)
          w[g.u2(i, j, k)] = half(j, ny) * dx * dy * hf.yface(i, j) / nz;
  }
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        w[g.u3(i, j, k)] = half(k, nz) * dx * dy * hf.cell(i, j) / nz;
  return w;
}

std::vector<double> Field::trace_weights() const {
  if (!velocity()) throw UsageError("pressure fields have no trace");
  const Grid3& g = *grid;
  const double dx = g.dx(), dy = g.dy();
  std::vector<double> w(g.n_trace(), 0.0);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i)
      w[g.t1(i, j)] = ((i == 0 || i == g.nx()) ? 0.5 : 1.0) * dx * dy;
  if (g.dim() == 2) {
    for (int j = 0; j <= g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i)
        w[g.t2(i, j)] = ((j == 0 || j == g.ny()) ? 0.5 : 1.0) * dx * dy;
  }
  return w;
}

}  // namespace thinslip
