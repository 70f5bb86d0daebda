#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "thinslip/errors.hpp"

namespace thinslip::cli {

using nlohmann::json;

namespace {

const std::vector<std::pair<Mode, std::string>> kModes = {
    {Mode::Limit, "limit"},     {Mode::Full, "full"},         {Mode::Sweep, "sweep"},
    {Mode::Verify, "verify"},   {Mode::Compare, "compare"},   {Mode::Classify, "classify"},
    {Mode::Profile, "profile"}};

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void reject_unknown(const json& obj, const std::string& path, std::set<std::string> allowed) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(join(path, key), "unknown key");
  }
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

int get_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<int>();
}

std::vector<double> get_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(get_number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Preset get_preset(const json& v, const std::string& path) {
  reject_unknown(v, path, {"preset", "coeffs"});
  Preset p;
  if (!v.contains("preset") || !v["preset"].is_string()) {
    throw ConfigError(join(path, "preset"), "expected a preset name");
  }
  p.key = v["preset"].get<std::string>();
  if (v.contains("coeffs")) p.coeffs = get_numbers(v["coeffs"], join(path, "coeffs"));
  return p;
}

template <class F>
void with_path(const std::string& path, F&& check) {
  try {
    check();
  } catch (const ParameterError& e) {
    throw ConfigError(path, e.what());
  }
}

void read_geometry(const json& g, RunConfig& cfg) {
  const std::string path = "geometry";
  reject_unknown(g, path, {"dim", "extent", "n_cells", "n_z3", "height"});
  ReducedDomain d;
  if (g.contains("dim")) d.dim = get_int(g["dim"], "geometry.dim");
  if (d.dim != 1 && d.dim != 2) throw ConfigError("geometry.dim", "must be 1 or 2");
  if (g.contains("extent")) {
    const auto e = get_numbers(g["extent"], "geometry.extent");
    if (e.size() != static_cast<std::size_t>(d.dim)) {
      throw ConfigError("geometry.extent", "needs one entry per reduced dimension");
    }
    d.lx = e[0];
    if (d.dim == 2) d.ly = e[1];
  }
  if (g.contains("n_cells")) {
    const auto& n = g["n_cells"];
    if (!n.is_array() || n.size() != static_cast<std::size_t>(d.dim)) {
      throw ConfigError("geometry.n_cells", "needs one integer per reduced dimension");
    }
    d.nx = get_int(n[0], "geometry.n_cells[0]");
    d.ny = d.dim == 2 ? get_int(n[1], "geometry.n_cells[1]") : 1;
  } else if (d.dim == 1) {
    d.ny = 1;
  }
  if (!(d.lx > 0.0) || (d.dim == 2 && !(d.ly > 0.0))) {
    throw ConfigError("geometry.extent", "must be > 0");
  }
  if (d.nx < 2 || (d.dim == 2 && d.ny < 2)) {
    throw ConfigError("geometry.n_cells", "need at least 2 cells per axis");
  }
  cfg.domain = d;
  if (g.contains("n_z3")) cfg.nz = get_int(g["n_z3"], "geometry.n_z3");
  if (cfg.nz < 1) throw ConfigError("geometry.n_z3", "must be >= 1");
  if (g.contains("height")) cfg.height = get_preset(g["height"], "geometry.height");
  with_path("geometry.height", [&] { HeightField(cfg.domain, make_height(cfg.height, cfg.domain)); });
}

void read_physics(const json& p, RunConfig& cfg) {
  reject_unknown(p, "physics", {"nu", "s", "gamma", "K", "lambda", "delta", "eps"});
  FluidParams& fp = cfg.params;
  if (p.contains("nu")) fp.nu = get_number(p["nu"], "physics.nu");
  if (p.contains("s")) fp.s = get_number(p["s"], "physics.s");
  if (p.contains("gamma")) fp.gamma = get_number(p["gamma"], "physics.gamma");
  if (p.contains("eps")) fp.eps = get_number(p["eps"], "physics.eps");
  if (p.contains("K") && p.contains("lambda")) {
    throw ConfigError("physics.lambda", "give either K or lambda");
  }
  if (p.contains("K")) {
    const json& k = p["K"];
    if (!k.is_array() || k.size() != 2 || !k[0].is_array() || !k[1].is_array() ||
        k[0].size() != 2 || k[1].size() != 2) {
      throw ConfigError("physics.K", "expected a 2x2 array");
    }
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        fp.K(r, c) = get_number(k[r][c], "physics.K[" + std::to_string(r) + "][" +
                                             std::to_string(c) + "]");
  }
  if (p.contains("lambda")) {
    const double lambda = get_number(p["lambda"], "physics.lambda");
    with_path("physics.lambda", [&] { fp.K = navier_tensor(lambda); });
  }
  if (p.contains("delta") && !p["delta"].is_null()) {
    fp.delta_reg = get_number(p["delta"], "physics.delta");
  }
  if (!(fp.nu > 0.0)) throw ConfigError("physics.nu", "must be > 0");
  with_path("physics.s", [&] { classify_regime(fp.s, fp.gamma); });
  if (fp.s < kMinFlowIndex) {
    std::ostringstream os;
    os << "flow index must be >= " << kMinFlowIndex;
    throw ConfigError("physics.s", os.str());
  }
  with_path("physics.K", [&] {
    FluidParams k = fp;
    k.delta_reg.reset();
    k.eps = 1.0;
    k.validate();
  });
  with_path("physics.eps", [&] {
    FluidParams e = fp;
    e.delta_reg.reset();
    e.validate();
  });
  with_path("physics.delta", [&] { fp.validate(); });
}

void read_solver(const json& s, RunConfig& cfg) {
  reject_unknown(s, "solver", {"convection", "robin_order", "outer_tol", "max_outer", "picard_tol",
                               "max_picard", "relax"});
  if (s.contains("convection")) {
    if (!s["convection"].is_boolean()) throw ConfigError("solver.convection", "expected a boolean");
    cfg.full.convection = s["convection"].get<bool>();
  }
  if (s.contains("robin_order")) {
    cfg.full.robin_order = get_int(s["robin_order"], "solver.robin_order");
    if (cfg.full.robin_order != 1 && cfg.full.robin_order != 2) {
      throw ConfigError("solver.robin_order", "must be 1 or 2");
    }
  }
  if (s.contains("outer_tol")) cfg.full.outer_tol = get_number(s["outer_tol"], "solver.outer_tol");
  if (!(cfg.full.outer_tol > 0.0)) throw ConfigError("solver.outer_tol", "must be > 0");
  if (s.contains("max_outer")) cfg.full.max_outer = get_int(s["max_outer"], "solver.max_outer");
  if (cfg.full.max_outer < 1) throw ConfigError("solver.max_outer", "must be >= 1");
  if (s.contains("picard_tol")) cfg.limit.picard_tol = get_number(s["picard_tol"], "solver.picard_tol");
  if (!(cfg.limit.picard_tol > 0.0)) throw ConfigError("solver.picard_tol", "must be > 0");
  if (s.contains("max_picard")) cfg.limit.max_picard = get_int(s["max_picard"], "solver.max_picard");
  if (cfg.limit.max_picard < 1) throw ConfigError("solver.max_picard", "must be >= 1");
  if (s.contains("relax")) cfg.limit.relax = get_number(s["relax"], "solver.relax");
  if (!(cfg.limit.relax > 0.0 && cfg.limit.relax <= 1.0)) {
    throw ConfigError("solver.relax", "must lie in (0, 1]");
  }
}

void read_profile(const json& p, RunConfig& cfg) {
  reject_unknown(p, "profile", {"G", "h", "regime"});
  if (p.contains("G")) {
    const auto g = get_numbers(p["G"], "profile.G");
    if (g.empty() || g.size() > 2) throw ConfigError("profile.G", "expected 1 or 2 components");
    cfg.profile_G = Vec2(g[0], g.size() > 1 ? g[1] : 0.0);
  }
  if (p.contains("h")) cfg.profile_h = get_number(p["h"], "profile.h");
  if (!(cfg.profile_h > 0.0)) throw ConfigError("profile.h", "must be > 0");
  if (p.contains("regime")) {
    if (!p["regime"].is_string()) throw ConfigError("profile.regime", "expected a string");
    const std::string r = p["regime"].get<std::string>();
    if (r == "critical") cfg.profile_regime = RegimeKind::Critical;
    else if (r == "supercritical") cfg.profile_regime = RegimeKind::Supercritical;
    else if (r == "subcritical") cfg.profile_regime = RegimeKind::Subcritical;
    else throw ConfigError("profile.regime", "unknown regime '" + r + "'");
  }
}

}  // namespace

std::string mode_name(Mode mode) {
  for (const auto& [m, name] : kModes)
    if (m == mode) return name;
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  for (const auto& [m, n] : kModes)
    if (n == name) return m;
  throw ConfigError("mode", "unknown mode '" + name + "'");
}

RunConfig load_config(const json& doc) {
  reject_unknown(doc, "", {"mode", "geometry", "physics", "forcing", "eps_list", "solver", "output",
                           "seed", "workers", "profile"});
  RunConfig cfg;
  cfg.raw = doc;
  if (doc.contains("mode")) {
    if (!doc["mode"].is_string()) throw ConfigError("mode", "expected a string");
    cfg.mode = parse_mode(doc["mode"].get<std::string>());
  }
  read_geometry(doc.value("geometry", json::object()), cfg);
  read_physics(doc.value("physics", json::object()), cfg);
  if (doc.contains("forcing")) cfg.forcing = get_preset(doc["forcing"], "forcing");
  with_path("forcing", [&] { make_forcing(cfg.forcing, cfg.domain); });
  if (doc.contains("eps_list")) cfg.eps_list = get_numbers(doc["eps_list"], "eps_list");
  for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
    if (!(cfg.eps_list[i] > 0.0)) {
      throw ConfigError("eps_list[" + std::to_string(i) + "]", "must be > 0");
    }
  }
  std::set<double> distinct(cfg.eps_list.begin(), cfg.eps_list.end());
  if (distinct.size() != cfg.eps_list.size()) throw ConfigError("eps_list", "duplicate values");
  const bool needs_sweep =
      cfg.mode == Mode::Verify || cfg.mode == Mode::Classify || cfg.mode == Mode::Sweep;
  if (needs_sweep && cfg.eps_list.size() < 3) {
    throw ConfigError("eps_list", "sweeps need at least 3 values");
  }
  read_solver(doc.value("solver", json::object()), cfg);
  if (doc.contains("output")) {
    if (!doc["output"].is_string() || doc["output"].get<std::string>().empty()) {
      throw ConfigError("output", "expected a non-empty path");
    }
    cfg.output = doc["output"].get<std::string>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("workers")) cfg.workers = get_int(doc["workers"], "workers");
  if (cfg.workers < 1) throw ConfigError("workers", "must be >= 1");
  read_profile(doc.value("profile", json::object()), cfg);
  const bool needs_full = cfg.mode != Mode::Limit && cfg.mode != Mode::Profile;
  if (needs_full && !HeightField(cfg.domain, make_height(cfg.height, cfg.domain)).is_constant()) {
    throw ConfigError("geometry.height", "full-order modes need a constant gap");
  }
  return cfg;
}

json read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("parse error: ") + e.what());
  }
  return doc;
}

RunConfig load_config_file(const std::string& path) { return load_config(read_document(path)); }

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--set", "expected key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw ConfigError(key, "empty path component");
    if (!node->is_object()) throw ConfigError(key, "path crosses a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

}  // namespace thinslip::cli
