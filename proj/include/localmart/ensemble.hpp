#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "localmart/time_grid.hpp"

namespace localmart {

struct SeedInfo {
  std::uint64_t master_seed = 0;
  std::uint64_t scenario_id = 0;
  std::uint64_t path_offset = 0;
};

// Monte Carlo ensembles carry sampling noise; exact ensembles (finite lattices,
// hand-built path sets) carry the true law and are checked with zero tolerance.
enum class EnsembleKind { monte_carlo, exact };

/// Read-only view of one path together with its grid.
struct PathView {
  std::span<const double> values;
  const TimeGrid* grid = nullptr;

  double operator[](std::size_t k) const { return values[k]; }
  std::size_t size() const noexcept { return values.size(); }
};

/// Discretized sample paths on a common grid, immutable after construction.
///
/// Values are stored row-major (one row per path). Weights are per-path
/// probabilities summing to one.
class PathEnsemble {
 public:
  PathEnsemble(TimeGrid grid, std::size_t n_paths, std::vector<double> values, std::vector<double> weights,
               EnsembleKind kind, SeedInfo seed = {});

  /// Uniformly weighted Monte Carlo ensemble.
  static PathEnsemble monte_carlo(TimeGrid grid, std::size_t n_paths, std::vector<double> values, SeedInfo seed);

  /// Exact finite ensemble from explicit rows and weights.
  static PathEnsemble exact(TimeGrid grid, const std::vector<std::vector<double>>& rows, std::vector<double> weights);
  static PathEnsemble exact(TimeGrid grid, const std::vector<std::vector<double>>& rows);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t n_paths() const noexcept { return n_paths_; }
  std::size_t n_times() const noexcept { return grid_.size(); }
  EnsembleKind kind() const noexcept { return kind_; }
  bool is_exact() const noexcept { return kind_ == EnsembleKind::exact; }
  const SeedInfo& seed_info() const noexcept { return seed_; }

  double value(std::size_t path, std::size_t k) const { return values_[path * n_times() + k]; }
  std::span<const double> row(std::size_t path) const { return {values_.data() + path * n_times(), n_times()}; }
  PathView path(std::size_t i) const { return {row(i), &grid_}; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> weights() const noexcept { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }

  double min_value() const;
  double max_value() const;
  /// Largest absolute single-step increment over all paths.
  double max_step() const;

  const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }
  PathEnsemble with_metadata(const std::string& key, const std::string& value) const&;
  PathEnsemble with_metadata(const std::string& key, const std::string& value) &&;

  /// Same grid, weights and provenance, new values (one row per path).
  PathEnsemble with_values(std::vector<double> values) const;

 private:
  TimeGrid grid_;
  std::size_t n_paths_;
  std::vector<double> values_;
  std::vector<double> weights_;
  EnsembleKind kind_;
  SeedInfo seed_;
  std::map<std::string, std::string> metadata_;
};

/// True when every weight equals the first (Monte Carlo ensembles). Averages
/// over uniform weights are taken as sum / n so that constants average exactly.
bool is_uniform(std::span<const double> weights);

}  // namespace localmart
