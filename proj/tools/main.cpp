#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "config.hpp"
#include "run.hpp"

using namespace thinslip::cli;

namespace {

struct Common {
  std::string config;
  std::string out;
  int workers = 0;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("config", c.config, "JSON run configuration")->required();
  sub->add_option("-o,--out", c.out, "output directory (overrides config)");
  sub->add_option("--workers", c.workers, "concurrent solves")->check(CLI::PositiveNumber);
  sub->add_option("--set", c.sets, "override a config entry, e.g. physics.gamma=1");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thin-film power-law slip solvers"};
  app.require_subcommand(1);
  const std::vector<std::pair<std::string, Mode>> subs = {
      {"limit-solve", Mode::Limit},    {"full-solve", Mode::Full},
      {"profile", Mode::Profile},      {"sweep", Mode::Sweep},
      {"verify-estimates", Mode::Verify}, {"compare", Mode::Compare},
      {"classify", Mode::Classify}};
  Common common;
  std::vector<CLI::App*> handles;
  for (const auto& [name, _] : subs) {
    auto* sub = app.add_subcommand(name);
    add_common(sub, common);
    handles.push_back(sub);
  }
  CLI11_PARSE(app, argc, argv);

  Mode mode = Mode::Full;
  for (std::size_t i = 0; i < subs.size(); ++i)
    if (handles[i]->parsed()) mode = subs[i].second;

  std::string out_dir;
  try {
    nlohmann::json doc = read_document(common.config);
    for (const auto& s : common.sets) apply_override(doc, s);
    doc["mode"] = mode_name(mode);
    if (!common.out.empty()) doc["output"] = common.out;
    if (common.workers > 0) doc["workers"] = common.workers;
    if (doc.contains("output") && doc["output"].is_string())
      out_dir = output_dir(doc["output"].get<std::string>()).string();
    const RunConfig cfg = load_config(doc);
    out_dir = output_dir(cfg).string();
    const RunResult res = run(cfg);
    std::cout << nlohmann::json{{"status", "ok"},
                                {"dir", res.dir.string()},
                                {"artifacts", res.artifacts}}
                     .dump()
              << '\n';
    return 0;
  } catch (const std::exception& e) {
    const nlohmann::json report = error_report(e);
    std::cerr << report.dump() << '\n';
    if (!out_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(out_dir, ec);
      std::ofstream f(std::filesystem::path(out_dir) / "error.json");
      if (f) f << report.dump(2) << '\n';
    }
    return exit_code(e);
  }
}
