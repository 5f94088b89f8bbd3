#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "localmart/ensemble.hpp"
#include "localmart/time_grid.hpp"

namespace localmart {

/// x0 + sigma * W_t.
struct BrownianMotion {
  double x0 = 0.0;
  double sigma = 1.0;
};

/// x0 * exp(sigma * W_t - sigma^2 t / 2), simulated exactly.
struct DriftlessGbm {
  double x0 = 1.0;
  double sigma = 1.0;
};

/// dX = a X dt + b X^rho dW, Euler with full truncation, absorbed at 0.
struct Cev {
  double x0 = 1.0;
  double a = 0.0;
  double b = 1.0;
  double rho = 1.0;
};

/// Radial part of a delta-dimensional Brownian motion started at (x0, 0, ...).
/// Integer delta is simulated exactly from the coordinates; other values use
/// an Euler step of the squared process with full truncation.
struct Bessel {
  double x0 = 1.0;
  double delta = 3.0;
};

/// 1 / |W| for a three-dimensional Brownian motion W started at (1/x0, 0, 0).
/// Shares its driver with Bessel{1/x0, 3}.
struct InverseBessel3 {
  double x0 = 1.0;
};

/// Time-changed Brownian motion B_{tan(pi t / 2) ^ tau0} started at x0 and
/// absorbed at zero, forced to 0 at t = 1. Defined on [0, 1].
struct DsExample {
  double x0 = 1.0;
  /// Width of the terminal window (1 - cutoff, 1) that is not simulated; the
  /// value is carried through it. Zero selects the last grid interval.
  double cutoff = 0.0;
};

/// exp(-|W_t|^(1/(2n+1))) for a standard Brownian motion W.
struct AbsBmTransform {
  int n = 1;
};

using ProcessSpec = std::variant<BrownianMotion, DriftlessGbm, Cev, Bessel, InverseBessel3, DsExample, AbsBmTransform>;

/// Short model name used in configs and reports ("cev", "bessel", ...).
std::string model_name(const ProcessSpec& spec);
std::string describe(const ProcessSpec& spec);
/// True for variants whose paths are non-negative.
bool is_nonnegative(const ProcessSpec& spec);
/// Throws ParameterError when parameters are outside their invariants.
void validate(const ProcessSpec& spec);
/// Every model name accepted by the scenario grammar, with a one-line summary.
std::vector<std::pair<std::string, std::string>> model_catalog();

struct SimulationOptions {
  /// Identifies the random stream family; equal ids share draws path by path.
  std::uint64_t scenario_id = 0;
  /// Global index of the first simulated path, for chunked runs.
  std::uint64_t path_offset = 0;
  /// Euler sub-steps per grid interval (discretized schemes only).
  std::size_t substeps = 1;
};

/// Simulates n_paths paths. Path i depends only on (master_seed,
/// scenario_id, path_offset + i), never on the worker count.
PathEnsemble simulate_ensemble(const ProcessSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t master_seed, const SimulationOptions& options = {});

/// Coordinates of a dim-dimensional Brownian motion started at `start`
/// (remaining coordinates at 0), using the same draw order as the exact
/// Bessel simulator. Entry c of the result holds coordinate c.
std::vector<PathEnsemble> simulate_brownian_coordinates(std::size_t dim, double start, const TimeGrid& grid,
                                                        std::size_t n_paths, std::uint64_t master_seed,
                                                        const SimulationOptions& options = {});

/// Cumulative sum of squared increments along each path; starts at 0.
PathEnsemble realized_quadratic_variation(const PathEnsemble& ensemble);

}  // namespace localmart
