#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "thinslip/fullorder.hpp"
#include "thinslip/reynolds.hpp"

namespace thinslip::cli {

enum class Mode { Limit, Full, Sweep, Verify, Compare, Classify, Profile };

std::string mode_name(Mode mode);
Mode parse_mode(const std::string& name);

struct RunConfig {
  ReducedDomain domain;
  int nz = 12;
  Preset height{"constant", {1.0}};
  FluidParams params;
  Preset forcing{"rotational", {1.0}};
  Mode mode = Mode::Full;
  std::vector<double> eps_list{0.2, 0.1, 0.05};
  FullOptions full;
  LimitOptions limit;
  std::string output = "out";
  std::uint64_t seed = 0;
  int workers = 1;
  // profile mode
  Vec2 profile_G = Vec2(1.0, 0.0);
  double profile_h = 1.0;
  std::optional<RegimeKind> profile_regime;

  nlohmann::json raw;
};

/// Parses and validates a config document. Every rejection is a ConfigError
/// naming the offending field path.
RunConfig load_config(const nlohmann::json& doc);
nlohmann::json read_document(const std::string& path);
RunConfig load_config_file(const std::string& path);

/// Applies "a.b.c=value" to a document; value is parsed as JSON when
/// possible and kept as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace thinslip::cli
