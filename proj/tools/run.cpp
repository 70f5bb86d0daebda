#include "run.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "thinslip/analysis.hpp"
#include "thinslip/errors.hpp"
#include "thinslip/operators.hpp"

#ifndef THINSLIP_VERSION
#define THINSLIP_VERSION "unknown"
#endif

namespace thinslip::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string eps_tag(double eps) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "e%.6g", eps);
  return buf;
}

/// Serializes all file output of a run.
class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void text(const std::string& name, const std::string& body) {
    std::lock_guard lock(mu_);
    std::ofstream out(dir_ / name, std::ios::binary);
    out << body;
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    names_.push_back(name);
  }
  void json_file(const std::string& name, const json& doc) { text(name, doc.dump(2) + "\n"); }

  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  fs::path dir_;
  std::mutex mu_;
  std::vector<std::string> names_;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string velocity_csv(const Field& v) {
  const Grid3& g = *v.grid;
  std::ostringstream os;
  os << "z1,z2,z3,component,value\n";
  for (int idx = 0; idx < g.n_velocity(); ++idx) {
    const Location loc = velocity_location(g, idx);
    os << num(loc.z1) << ',' << num(loc.z2) << ',' << num(loc.z3) << ','
       << loc.component + 1 << ',' << num(v.values[idx]) << '\n';
  }
  const int nx = g.nx(), ny = g.ny();
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i)
      os << num(i * g.dx()) << ',' << num(g.domain().yc(j)) << ",0,1,"
         << num(v.trace[g.t1(i, j)]) << '\n';
  if (g.dim() == 2)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i < nx; ++i)
        os << num(g.domain().xc(i)) << ',' << num(j * g.dy()) << ",0,2,"
           << num(v.trace[g.t2(i, j)]) << '\n';
  return os.str();
}

std::string pressure_csv(const Field& p) {
  const Grid3& g = *p.grid;
  const ReducedDomain& d = g.domain();
  std::ostringstream os;
  if (p.kind == FieldKind::PressureReduced) {
    os << "z1,z2,value\n";
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i)
        os << num(d.xc(i)) << ',' << num(d.yc(j)) << ',' << num(p.values[d.cell(i, j)]) << '\n';
    return os.str();
  }
  os << "z1,z2,z3,value\n";
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < d.ny; ++j)
      for (int i = 0; i < d.nx; ++i)
        os << num(d.xc(i)) << ',' << num(d.yc(j)) << ',' << num(g.zc(k, g.height().cell(i, j)))
           << ',' << num(p.values[g.cell(i, j, k)]) << '\n';
  return os.str();
}

json vec(const Vec2& v) { return json::array({v[0], v[1]}); }

std::shared_ptr<const Grid3> make_grid(const RunConfig& cfg) {
  HeightField hf(cfg.domain, make_height(cfg.height, cfg.domain));
  return std::make_shared<const Grid3>(std::move(hf), cfg.nz);
}

struct Metric {
  double eps;
  std::string name;
  double value;
};

std::string metrics_csv(const std::vector<Metric>& rows) {
  std::ostringstream os;
  os << "eps,metric,value\n";
  for (const auto& r : rows) os << num(r.eps) << ',' << r.name << ',' << num(r.value) << '\n';
  return os.str();
}

std::vector<Metric> full_metrics(const FullOrderSolution& sol) {
  const NormBundle nb = measure_norms(sol);
  const double e = sol.eps;
  return {{e, "u_l2", nb.u_l2},
          {e, "deps_l2", nb.deps_l2},
          {e, "wall_ls", nb.wall_ls},
          {e, "p_l2", nb.p_l2},
          {e, "u3_l2", nb.u3_l2},
          {e, "outer_iters", static_cast<double>(sol.outer_iters)},
          {e, "saddle_residual", sol.saddle_residual},
          {e, "max_divergence", sol.max_divergence},
          {e, "energy_viscous", sol.energy.viscous},
          {e, "energy_boundary", sol.energy.boundary},
          {e, "energy_work", sol.energy.work},
          {e, "energy_mismatch", sol.energy.mismatch}};
}

json full_summary(const FullOrderSolution& sol) {
  const NormBundle nb = measure_norms(sol);
  return {{"eps", sol.eps},
          {"delta", sol.delta},
          {"outer_iters", sol.outer_iters},
          {"outer_history", sol.outer_history},
          {"linear_iters", sol.linear_iters},
          {"saddle_residual", sol.saddle_residual},
          {"max_divergence", sol.max_divergence},
          {"norms",
           {{"u_l2", nb.u_l2},
            {"deps_l2", nb.deps_l2},
            {"wall_ls", nb.wall_ls},
            {"p_l2", nb.p_l2},
            {"u3_l2", nb.u3_l2}}},
          {"energy",
           {{"viscous", sol.energy.viscous},
            {"boundary", sol.energy.boundary},
            {"work", sol.energy.work},
            {"mismatch", sol.energy.mismatch}}}};
}

/// Full-order solves for every eps, at most `workers` at a time. Results
/// keep the order of eps_list.
std::vector<FullOrderSolution> solve_sweep(const RunConfig& cfg,
                                           std::shared_ptr<const Grid3> grid,
                                           const std::vector<double>& eps_list,
                                           std::vector<double>& timings) {
  const VectorFn forcing = make_forcing(cfg.forcing, cfg.domain);
  std::vector<FullOrderSolution> out(eps_list.size());
  timings.assign(eps_list.size(), 0.0);
  std::vector<std::exception_ptr> errors(eps_list.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < eps_list.size(); i = next++) {
      try {
        FluidParams p = cfg.params;
        p.eps = eps_list[i];
        const auto t0 = Clock::now();
        out[i] = solve_full(grid, forcing, p, cfg.full);
        timings[i] = seconds_since(t0);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::min<int>(cfg.workers, static_cast<int>(eps_list.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

void write_full(Writer& w, const FullOrderSolution& sol) {
  const std::string tag = "full_" + eps_tag(sol.eps);
  w.text(tag + "_velocity.csv", velocity_csv(sol.velocity));
  w.text(tag + "_pressure.csv", pressure_csv(sol.pressure));
  w.json_file(tag + ".json", full_summary(sol));
}

void write_limit(Writer& w, const LimitSolution& lim) {
  w.text("limit_velocity.csv", velocity_csv(lim.velocity));
  w.text("limit_pressure.csv", pressure_csv(lim.pressure));
  const ReducedDomain& d = lim.pressure.grid->domain();
  std::ostringstream os;
  os << "normal,z1,z2,q1,q2\n";
  for (int j = 0; j < d.ny; ++j)
    for (int i = 0; i <= d.nx; ++i) {
      const Vec2& q = lim.xface_flux[j * (d.nx + 1) + i];
      os << "1," << num(d.xf(i)) << ',' << num(d.yc(j)) << ',' << num(q[0]) << ',' << num(q[1])
         << '\n';
    }
  if (d.dim == 2)
    for (int j = 0; j <= d.ny; ++j)
      for (int i = 0; i < d.nx; ++i) {
        const Vec2& q = lim.yface_flux[j * d.nx + i];
        os << "2," << num(d.xc(i)) << ',' << num(d.yf(j)) << ',' << num(q[0]) << ','
           << num(q[1]) << '\n';
      }
  w.text("limit_flux.csv", os.str());
  w.json_file("limit.json", {{"regime", std::string(to_string(lim.regime.kind))},
                             {"gamma_star", lim.regime.gamma_star},
                             {"delta", lim.delta},
                             {"picard_iters", lim.picard_iters},
                             {"picard_history", lim.picard_history},
                             {"flux_div_residual", lim.flux_div_residual},
                             {"u_l2", norm(lim.velocity, 2.0, Restriction::Omega)},
                             {"p_l2", norm(lim.pressure, 2.0, Restriction::Omega)}});
}

LimitSolution solve_limit_for(const RunConfig& cfg, std::shared_ptr<const Grid3> grid) {
  return solve_limit(grid, make_forcing(cfg.forcing, cfg.domain), cfg.params, cfg.limit);
}

json checks_json(const std::vector<Check>& checks) {
  json arr = json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"threshold", c.threshold}});
  return arr;
}

json slope_json(const SlopeFit& f) { return {{"slope", f.slope}, {"residual", f.residual}}; }

std::vector<Metric> report_metrics(const SweepReport& rep) {
  std::vector<Metric> rows;
  for (std::size_t i = 0; i < rep.norms.size(); ++i) {
    const NormBundle& nb = rep.norms[i];
    rows.push_back({nb.eps, "u_l2", nb.u_l2});
    rows.push_back({nb.eps, "deps_l2", nb.deps_l2});
    rows.push_back({nb.eps, "wall_ls", nb.wall_ls});
    rows.push_back({nb.eps, "p_l2", nb.p_l2});
    rows.push_back({nb.eps, "u3_l2", nb.u3_l2});
    if (i < rep.wall_ratio.size()) rows.push_back({nb.eps, "wall_ratio", rep.wall_ratio[i]});
    if (i < rep.limit_l2.size()) rows.push_back({nb.eps, "limit_l2", rep.limit_l2[i]});
    if (i < rep.limit_dz.size()) rows.push_back({nb.eps, "limit_dz", rep.limit_dz[i]});
  }
  return rows;
}

json report_json(const SweepReport& rep) {
  json norms = json::array();
  for (const auto& nb : rep.norms)
    norms.push_back({{"eps", nb.eps},
                     {"u_l2", nb.u_l2},
                     {"deps_l2", nb.deps_l2},
                     {"wall_ls", nb.wall_ls},
                     {"p_l2", nb.p_l2},
                     {"u3_l2", nb.u3_l2}});
  return {{"norms", norms},
          {"slopes",
           {{"u_l2", slope_json(rep.u_slope)},
            {"deps_l2", slope_json(rep.deps_slope)},
            {"wall_ls", slope_json(rep.wall_slope)},
            {"p_l2", slope_json(rep.p_slope)},
            {"u3_l2", slope_json(rep.u3_slope)}}},
          {"pressure_ratio", rep.pressure_ratio},
          {"wall_ratio", rep.wall_ratio},
          {"wall_ratio_growth", rep.wall_ratio_growth},
          {"limit_l2", rep.limit_l2},
          {"limit_dz", rep.limit_dz},
          {"checks", checks_json(rep.checks)},
          {"all_pass", rep.all_pass},
          {"verdict", rep.verdict}};
}

json profile_json(const ProfileSolution& p, Regime regime) {
  return {{"regime", std::string(to_string(regime.kind))},
          {"A", vec(p.A)},
          {"B", vec(p.B)},
          {"G", vec(p.G)},
          {"h", p.h},
          {"flux", vec(p.flux)},
          {"iters", p.newton_iters},
          {"residual", p.residual}};
}

}  // namespace

fs::path output_dir(const RunConfig& cfg) { return output_dir(cfg.output); }

fs::path output_dir(const std::string& output) {
  fs::path out(output);
  if (out.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) out = fs::path(root) / out;
  }
  return out;
}

RunResult run(const RunConfig& cfg) {
  const auto t_start = Clock::now();
  Writer w(output_dir(cfg));
  json timings = json::object();
  RunResult res;

  if (cfg.mode == Mode::Profile) {
    Regime regime = cfg.params.regime();
    if (cfg.profile_regime) regime.kind = *cfg.profile_regime;
    FluidParams p = cfg.params;
    p.K = effective_K(cfg.params, cfg.domain.dim);
    const ProfileSolution sol = solve_profile(cfg.profile_G, cfg.profile_h, p, regime);
    w.json_file("profile.json", profile_json(sol, regime));
  } else {
    auto grid = make_grid(cfg);
    const bool wants_limit =
        cfg.mode == Mode::Limit || cfg.mode == Mode::Compare || cfg.mode == Mode::Verify ||
        cfg.mode == Mode::Classify;
    std::optional<LimitSolution>& lim = res.limit;
    if (wants_limit) {
      const auto t0 = Clock::now();
      lim = solve_limit_for(cfg, grid);
      timings["limit"] = seconds_since(t0);
      write_limit(w, *lim);
    }
    if (cfg.mode != Mode::Limit) {
      const std::vector<double> eps_list =
          cfg.mode == Mode::Full ? std::vector<double>{cfg.params.eps} : cfg.eps_list;
      std::vector<double> solve_times;
      res.sweep = solve_sweep(cfg, grid, eps_list, solve_times);
      const auto& sweep = res.sweep;
      json per_eps = json::object();
      std::vector<Metric> metrics;
      for (std::size_t i = 0; i < sweep.size(); ++i) {
        write_full(w, sweep[i]);
        per_eps[eps_tag(sweep[i].eps)] = solve_times[i];
        const auto m = full_metrics(sweep[i]);
        metrics.insert(metrics.end(), m.begin(), m.end());
      }
      timings["full"] = per_eps;
      w.text("metrics.csv", metrics_csv(metrics));

      if (cfg.mode == Mode::Compare || cfg.mode == Mode::Verify) {
        std::vector<Metric> rows;
        json errs = json::array();
        std::vector<double> l2, dz;
        for (const auto& sol : sweep) {
          const LimitError e = compare_limit(sol, *lim);
          rows.push_back({sol.eps, "l2", e.l2});
          rows.push_back({sol.eps, "dz", e.dz});
          rows.push_back({sol.eps, "rel_l2", e.ref_l2 > 0.0 ? e.l2 / e.ref_l2 : 0.0});
          rows.push_back({sol.eps, "rel_dz", e.ref_dz > 0.0 ? e.dz / e.ref_dz : 0.0});
          errs.push_back({{"eps", sol.eps}, {"l2", e.l2}, {"dz", e.dz}, {"ref_l2", e.ref_l2},
                          {"ref_dz", e.ref_dz}});
          l2.push_back(e.l2);
          dz.push_back(e.dz);
        }
        if (cfg.mode == Mode::Compare) {
          w.text("compare.csv", metrics_csv(rows));
          w.json_file("compare.json", {{"errors", errs}});
        } else {
          SweepReport rep = verify_apriori(sweep, cfg.params);
          // The report orders entries by decreasing eps.
          std::vector<std::pair<double, std::pair<double, double>>> byeps;
          for (std::size_t i = 0; i < sweep.size(); ++i) byeps.push_back({sweep[i].eps, {l2[i], dz[i]}});
          std::sort(byeps.begin(), byeps.end(), [](auto& a, auto& b) { return a.first > b.first; });
          for (const auto& [e, v] : byeps) {
            rep.limit_l2.push_back(v.first);
            rep.limit_dz.push_back(v.second);
          }
          w.text("report.csv", metrics_csv(report_metrics(rep)));
          w.json_file("report.json", report_json(rep));
        }
      }
      if (cfg.mode == Mode::Classify) {
        std::vector<TraceSample> samples;
        for (const auto& sol : sweep) samples.push_back(trace_sample(sol));
        const RegimeVerdict v = regime_identify(samples, cfg.params, lim->delta);
        json ind = json::array();
        std::vector<Metric> rows;
        for (const auto& r : v.indicators) {
          ind.push_back({{"eps", r.eps}, {"sub", r.sub}, {"super", r.super}, {"crit", r.crit}});
          rows.push_back({r.eps, "sub", r.sub});
          rows.push_back({r.eps, "super", r.super});
          rows.push_back({r.eps, "crit", r.crit});
        }
        w.text("classify.csv", metrics_csv(rows));
        w.json_file("classify.json",
                    {{"verdict", v.verdict},
                     {"expected", std::string(to_string(cfg.params.regime().kind))},
                     {"indicators", ind}});
      }
    }
  }

  timings["total"] = seconds_since(t_start);
  res.dir = w.dir();
  res.artifacts = w.names();
  w.json_file("manifest.json", {{"version", THINSLIP_VERSION},
                                {"mode", mode_name(cfg.mode)},
                                {"config", cfg.raw},
                                {"artifacts", res.artifacts},
                                {"timings", timings}});
  res.artifacts.push_back("manifest.json");
  return res;
}

json error_report(const std::exception& e) {
  json doc = {{"error", "internal"}, {"message", e.what()}};
  if (const auto* err = dynamic_cast<const Error*>(&e)) doc["error"] = err->kind();
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) doc["field"] = ce->field();
  if (const auto* se = dynamic_cast<const SolverError*>(&e)) doc["history"] = se->history();
  return doc;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
      dynamic_cast<const UsageError*>(&e))
    return 2;
  if (dynamic_cast<const SolverError*>(&e)) return 3;
  if (dynamic_cast<const DataError*>(&e)) return 4;
  return 1;
}

}  // namespace thinslip::cli
