#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace thinslip::cli {

/// Environment variable prefixed to relative output directories.
inline constexpr const char* kOutputRootEnv = "THINSLIP_OUTPUT_ROOT";

std::filesystem::path output_dir(const std::string& output);
std::filesystem::path output_dir(const RunConfig& cfg);

struct RunResult {
  std::filesystem::path dir;
  std::vector<std::string> artifacts;
  /// In-memory solutions behind the artifacts, in eps_list order.
  std::vector<FullOrderSolution> sweep;
  std::optional<LimitSolution> limit;
};

/// Runs the configured mode and writes its artifacts plus manifest.json.
RunResult run(const RunConfig& cfg);

/// Machine-readable description of an exception.
nlohmann::json error_report(const std::exception& e);
int exit_code(const std::exception& e);

}  // namespace thinslip::cli
