#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "localmart/scenario.hpp"

namespace localmart {

inline constexpr const char* kReportSchemaVersion = "1.0";

struct RunOptions {
  /// Output directory; empty means the scenario's `out`, else "out/<name>".
  std::string out_dir;
  bool write_files = true;
};

struct RunResult {
  /// 0: completed, nothing flagged; 2: some task flagged VIOLATION_SUSPECTED
  /// or ARBITRAGE. Errors surface as exceptions (exit code 1 at the CLI).
  int exit_code = 0;
  nlohmann::json report;
  std::string out_dir;
  std::vector<std::string> files;
};

/// Version of the library every module is built from.
std::string library_version();

/// Validates, builds the ensemble, runs every task in order and writes
/// report.json, the CSV tables and the SVG plots.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

}  // namespace localmart
