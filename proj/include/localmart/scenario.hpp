#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "localmart/constructive.hpp"
#include "localmart/diagnostics.hpp"
#include "localmart/lattice.hpp"
#include "localmart/process.hpp"
#include "localmart/star.hpp"
#include "localmart/stopping.hpp"
#include "localmart/strategy.hpp"
#include "localmart/transforms.hpp"

namespace localmart {

/// Names visible to expressions: every rule and event defined so far.
struct Symbols {
  std::map<std::string, StoppingRule> rules;
  std::map<std::string, EventPredicate> events;
};

// Expression grammar (the same text describe() produces). Each throws
// ValidationError naming the offending token; named references resolve
// through `symbols`.
StoppingRule parse_rule(const std::string& text, const Symbols& symbols = {});
EventPredicate parse_event(const std::string& text, const Symbols& symbols = {});
WeightRule parse_weight(const std::string& text, const Symbols& symbols = {});
/// `leg(entry, exit, weight); leg(...)`
SimpleStrategy parse_strategy(const std::string& text, const Symbols& symbols = {});
MonotoneMap parse_map(const std::string& text);

enum class TaskType { defect, star_scan, arb_search, extract, reduce, oracle, invariance };
std::string to_string(TaskType t);
std::optional<TaskType> task_type_from_string(const std::string& name);

struct TaskSpec {
  TaskType type = TaskType::defect;
  std::size_t line = 0;

  // defect
  std::vector<double> times;
  DefectOptions defect_options;
  std::vector<StoppedPair> pairs;
  // star-scan, extract, invariance (star mode)
  std::vector<StarProbe> probes;
  StarOptions star_options;
  std::optional<ViolationWitness> witness;
  // arb-search, reduce, invariance (s0 mode)
  std::vector<LegCandidate> candidates;
  std::vector<SimpleStrategy> strategies;
  bool shortsale_restricted = false;
  // oracle
  std::vector<double> alphabet;
  double budget = 1e6;
  // invariance
  std::optional<MonotoneMap> map;
  std::string mode = "star";

  /// Canonical key = value pairs, for the report.
  std::vector<std::pair<std::string, std::string>> resolved;
};

struct GridSpec {
  double horizon = 1.0;
  std::size_t steps = 0;
  std::vector<double> points;

  TimeGrid build() const;
};

struct Scenario {
  std::string name;
  std::optional<std::uint64_t> seed;
  std::size_t n_paths = 10000;
  std::string out_dir;
  std::optional<ProcessSpec> process;
  SimulationOptions simulation;
  std::optional<LatticeSpec> lattice;
  std::optional<GridSpec> grid;
  std::vector<std::pair<std::string, std::string>> rule_text;
  std::vector<std::pair<std::string, std::string>> event_text;
  Symbols symbols;
  std::vector<TaskSpec> tasks;
  std::string source;
};

/// Parses a scenario file. ParseError (with line numbers) on malformed input,
/// unknown sections, keys, task names or references.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// Cross-field checks after overrides: exactly one source, a seed, a grid for
/// process sources, lattice-only tasks on lattices. ValidationError.
void validate_scenario(const Scenario& scenario);

}  // namespace localmart
