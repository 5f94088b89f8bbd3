#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "localmart/errors.hpp"
#include "localmart/process.hpp"
#include "localmart/report.hpp"
#include "localmart/scenario.hpp"

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::string out;
};

localmart::Scenario load_with_overrides(const std::string& path, const Overrides& o) {
  localmart::Scenario sc = localmart::load_scenario(path);
  if (o.seed) sc.seed = *o.seed;
  if (o.paths) sc.n_paths = *o.paths;
  if (!o.out.empty()) sc.out_dir = o.out;
  localmart::validate_scenario(sc);
  return sc;
}

void print_summary(const localmart::RunResult& r) {
  for (const auto& t : r.report["tasks"]) {
    std::string verdict = t.contains("verdict") ? t["verdict"].get<std::string>()
                          : t.contains("classification") ? t["classification"].get<std::string>()
                                                         : "done";
    std::cout << "task " << t["task"].get<std::string>() << ": " << verdict << "\n";
  }
  std::cout << "wrote " << r.files.size() << " files to " << r.out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strict local martingale and arbitrage laboratory"};
  app.require_subcommand(1);

  Overrides over;
  std::string config;

  auto* run = app.add_subcommand("run", "Run a scenario file and write reports");
  run->add_option("config", config, "Scenario file")->required();
  run->add_option("--seed", over.seed, "Override the master seed");
  run->add_option("--paths", over.paths, "Override the number of paths");
  run->add_option("--out", over.out, "Output directory");

  auto* check = app.add_subcommand("validate", "Parse and check a scenario file without running it");
  check->add_option("config", config, "Scenario file")->required();
  check->add_option("--seed", over.seed, "Override the master seed");

  app.add_subcommand("list-models", "List the process models");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("list-models")) {
      for (const auto& [name, summary] : localmart::model_catalog()) std::cout << name << "  " << summary << "\n";
      return 0;
    }
    if (app.got_subcommand("validate")) {
      const auto sc = load_with_overrides(config, over);
      std::cout << config << ": ok (" << sc.tasks.size() << " tasks)\n";
      return 0;
    }
    const auto sc = load_with_overrides(config, over);
    const auto result = localmart::run_scenario(sc, {over.out, true});
    print_summary(result);
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << config << ": " << e.what() << "\n";
    return 1;
  }
}
