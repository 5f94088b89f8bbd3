#include "localmart/process.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "localmart/errors.hpp"
#include "localmart/parallel.hpp"
#include "localmart/rng.hpp"

namespace localmart {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

bool is_integer_dimension(double delta) { return delta == std::floor(delta) && delta <= 64.0; }

// x^rho with the common exponents special-cased; pow dominates Euler cost.
double power(double x, double rho) {
  if (rho == 1.0) return x;
  if (rho == 0.5) return std::sqrt(x);
  if (rho == 1.5) return x * std::sqrt(x);
  if (rho == 2.0) return x * x;
  return std::pow(x, rho);
}

void simulate_brownian(const BrownianMotion& p, const TimeGrid& grid, PathRng& rng, std::span<double> row) {
  double x = p.x0;
  row[0] = x;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    x += p.sigma * std::sqrt(grid[k] - grid[k - 1]) * rng.normal();
    row[k] = x;
  }
}

void simulate_gbm(const DriftlessGbm& p, const TimeGrid& grid, PathRng& rng, std::span<double> row) {
  double w = 0.0;
  row[0] = p.x0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    w += std::sqrt(grid[k] - grid[k - 1]) * rng.normal();
    row[k] = p.x0 * std::exp(p.sigma * w - 0.5 * p.sigma * p.sigma * grid[k]);
  }
}

void simulate_cev(const Cev& p, const TimeGrid& grid, std::size_t substeps, PathRng& rng, std::span<double> row) {
  double x = p.x0;
  row[0] = x;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double h = (grid[k] - grid[k - 1]) / static_cast<double>(substeps);
    const double sqrt_h = std::sqrt(h);
    for (std::size_t j = 0; j < substeps && x > 0.0; ++j) {
      x += p.a * x * h + p.b * power(x, p.rho) * sqrt_h * rng.normal();
      if (!(x > 0.0)) x = 0.0;
    }
    row[k] = x;
  }
}

// Exact radial simulation from the Gaussian coordinates. `emit` maps the
// radius to the recorded value.
template <class Emit>
void simulate_radial(std::size_t dim, double start, const TimeGrid& grid, PathRng& rng, std::span<double> row,
                     Emit emit) {
  std::vector<double> coord(dim, 0.0);
  coord[0] = start;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double s = std::sqrt(grid[k] - grid[k - 1]);
    double r2 = 0.0;
    for (auto& c : coord) {
      c += s * rng.normal();
      r2 += c * c;
    }
    row[k] = emit(std::sqrt(r2));
  }
}

void simulate_besq(const Bessel& p, const TimeGrid& grid, std::size_t substeps, PathRng& rng, std::span<double> row) {
  double y = p.x0 * p.x0;
  row[0] = p.x0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double h = (grid[k] - grid[k - 1]) / static_cast<double>(substeps);
    const double sqrt_h = std::sqrt(h);
    for (std::size_t j = 0; j < substeps; ++j) {
      y += p.delta * h + 2.0 * std::sqrt(std::max(y, 0.0)) * sqrt_h * rng.normal();
    }
    row[k] = std::sqrt(std::max(y, 0.0));
  }
}

double ds_simulation_limit(const DsExample& p, const TimeGrid& grid) {
  if (std::abs(grid.horizon() - 1.0) > grid.tolerance()) return grid.horizon();
  const double window = p.cutoff > 0.0 ? p.cutoff : grid[grid.size() - 1] - grid[grid.size() - 2];
  return 1.0 - window;
}

void simulate_ds(const DsExample& p, const TimeGrid& grid, PathRng& rng, std::span<double> row) {
  const double limit = ds_simulation_limit(p, grid);
  const bool forced_terminal = std::abs(grid.horizon() - 1.0) <= grid.tolerance();
  double b = p.x0;
  double u_prev = 0.0;
  bool absorbed = false;
  row[0] = b;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double t = grid[k];
    if (forced_terminal && k + 1 == grid.size()) {
      row[k] = 0.0;
      break;
    }
    if (t > limit + grid.tolerance()) {
      row[k] = b;
      continue;
    }
    const double u = std::tan(0.5 * std::numbers::pi * t);
    const double du = u - u_prev;
    u_prev = u;
    const double z = rng.normal();
    const double uni = rng.uniform();
    if (!absorbed) {
      const double next = b + std::sqrt(du) * z;
      // Brownian bridge: P(hit 0 in between | b, next > 0) = exp(-2 b next / du).
      if (next <= 0.0 || uni < std::exp(-2.0 * b * next / du)) {
        absorbed = true;
        b = 0.0;
      } else {
        b = next;
      }
    }
    row[k] = b;
  }
}

void simulate_abs_bm(const AbsBmTransform& p, const TimeGrid& grid, PathRng& rng, std::span<double> row) {
  const double exponent = 1.0 / (2.0 * p.n + 1.0);
  double w = 0.0;
  row[0] = 1.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    w += std::sqrt(grid[k] - grid[k - 1]) * rng.normal();
    row[k] = std::exp(-std::pow(std::abs(w), exponent));
  }
}

std::string scheme_name(const ProcessSpec& spec) {
  return std::visit(overloaded{
                        [](const BrownianMotion&) { return std::string("exact_gaussian"); },
                        [](const DriftlessGbm&) { return std::string("exact_lognormal"); },
                        [](const Cev&) { return std::string("euler_full_truncation_absorbing"); },
                        [](const Bessel& b) {
                          return is_integer_dimension(b.delta) ? std::string("exact_radial")
                                                               : std::string("besq_euler_full_truncation");
                        },
                        [](const InverseBessel3&) { return std::string("exact_radial"); },
                        [](const DsExample&) { return std::string("exact_time_change_bridge_absorption"); },
                        [](const AbsBmTransform&) { return std::string("exact_gaussian"); },
                    },
                    spec);
}

}  // namespace

std::string model_name(const ProcessSpec& spec) {
  static const char* names[] = {"brownian", "gbm", "cev", "bessel", "inverse_bessel3", "ds_example",
                                "abs_bm_transform"};
  return names[spec.index()];
}

std::string describe(const ProcessSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const BrownianMotion& p) { os << "brownian(x0=" << p.x0 << ", sigma=" << p.sigma << ")"; },
                 [&](const DriftlessGbm& p) { os << "gbm(x0=" << p.x0 << ", sigma=" << p.sigma << ")"; },
                 [&](const Cev& p) {
                   os << "cev(x0=" << p.x0 << ", a=" << p.a << ", b=" << p.b << ", rho=" << p.rho << ")";
                 },
                 [&](const Bessel& p) { os << "bessel(x0=" << p.x0 << ", delta=" << p.delta << ")"; },
                 [&](const InverseBessel3& p) { os << "inverse_bessel3(x0=" << p.x0 << ")"; },
                 [&](const DsExample& p) { os << "ds_example(x0=" << p.x0 << ", cutoff=" << p.cutoff << ")"; },
                 [&](const AbsBmTransform& p) { os << "abs_bm_transform(n=" << p.n << ")"; },
             },
             spec);
  return os.str();
}

bool is_nonnegative(const ProcessSpec& spec) { return !std::holds_alternative<BrownianMotion>(spec); }

std::vector<std::pair<std::string, std::string>> model_catalog() {
  return {
      {"brownian", "x0 + sigma W_t (params: x0, sigma)"},
      {"gbm", "driftless geometric Brownian motion, a true martingale (params: x0, sigma)"},
      {"cev", "dX = a X dt + b X^rho dW; strict local martingale for rho > 1 when a = 0 (params: x0, a, b, rho)"},
      {"bessel", "Bessel process of dimension delta > 2 (params: x0, delta)"},
      {"inverse_bessel3", "reciprocal of a 3-dimensional Bessel process, a strict local martingale (params: x0)"},
      {"ds_example", "absorbed Brownian motion run on the clock tan(pi t/2), zero at t = 1 (params: x0, cutoff)"},
      {"abs_bm_transform", "exp(-|W_t|^(1/(2n+1))), not a semimartingale (params: n)"},
  };
}

void validate(const ProcessSpec& spec) {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string(what) + " must be positive");
  };
  auto nonnegative = [](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError(std::string(what) + " must be non-negative");
  };
  std::visit(overloaded{
                 [&](const BrownianMotion& p) {
                   if (!std::isfinite(p.x0)) throw ParameterError("x0 must be finite");
                   nonnegative(p.sigma, "sigma");
                 },
                 [&](const DriftlessGbm& p) {
                   positive(p.x0, "x0");
                   nonnegative(p.sigma, "sigma");
                 },
                 [&](const Cev& p) {
                   positive(p.x0, "x0");
                   positive(p.rho, "rho");
                   nonnegative(p.b, "b");
                   if (!std::isfinite(p.a)) throw ParameterError("a must be finite");
                 },
                 [&](const Bessel& p) {
                   positive(p.x0, "x0");
                   if (!(p.delta > 2.0) || !std::isfinite(p.delta)) throw ParameterError("delta must exceed 2");
                 },
                 [&](const InverseBessel3& p) { positive(p.x0, "x0"); },
                 [&](const DsExample& p) {
                   positive(p.x0, "x0");
                   if (!(p.cutoff >= 0.0) || !(p.cutoff < 1.0)) throw ParameterError("cutoff must lie in [0, 1)");
                 },
                 [&](const AbsBmTransform& p) {
                   if (p.n < 0) throw ParameterError("n must be a non-negative integer");
                 },
             },
             spec);
}

PathEnsemble simulate_ensemble(const ProcessSpec& spec, const TimeGrid& grid, std::size_t n_paths,
                               std::uint64_t master_seed, const SimulationOptions& options) {
  validate(spec);
  if (n_paths == 0) throw ParameterError("n_paths must be positive");
  if (options.substeps == 0) throw ParameterError("substeps must be positive");
  if (std::holds_alternative<DsExample>(spec) && grid.horizon() > 1.0 + grid.tolerance()) {
    throw DomainError("ds_example is defined on [0, 1]; grid horizon exceeds 1");
  }

  const std::size_t n_times = grid.size();
  std::vector<double> values(n_paths * n_times);
  parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      PathRng rng(master_seed, options.scenario_id, options.path_offset + i);
      std::span<double> row(values.data() + i * n_times, n_times);
      std::visit(overloaded{
                     [&](const BrownianMotion& p) { simulate_brownian(p, grid, rng, row); },
                     [&](const DriftlessGbm& p) { simulate_gbm(p, grid, rng, row); },
                     [&](const Cev& p) { simulate_cev(p, grid, options.substeps, rng, row); },
                     [&](const Bessel& p) {
                       if (is_integer_dimension(p.delta)) {
                         row[0] = p.x0;
                         simulate_radial(static_cast<std::size_t>(p.delta), p.x0, grid, rng, row,
                                         [](double r) { return r; });
                       } else {
                         simulate_besq(p, grid, options.substeps, rng, row);
                       }
                     },
                     [&](const InverseBessel3& p) {
                       row[0] = p.x0;
                       simulate_radial(3, 1.0 / p.x0, grid, rng, row, [](double r) { return 1.0 / r; });
                     },
                     [&](const DsExample& p) { simulate_ds(p, grid, rng, row); },
                     [&](const AbsBmTransform& p) { simulate_abs_bm(p, grid, rng, row); },
                 },
                 spec);
    }
  });

  SeedInfo seed{master_seed, options.scenario_id, options.path_offset};
  return PathEnsemble::monte_carlo(grid, n_paths, std::move(values), seed)
      .with_metadata("model", describe(spec))
      .with_metadata("scheme", scheme_name(spec))
      .with_metadata("substeps", std::to_string(options.substeps));
}

std::vector<PathEnsemble> simulate_brownian_coordinates(std::size_t dim, double start, const TimeGrid& grid,
                                                        std::size_t n_paths, std::uint64_t master_seed,
                                                        const SimulationOptions& options) {
  if (dim == 0) throw ParameterError("dimension must be positive");
  if (n_paths == 0) throw ParameterError("n_paths must be positive");
  const std::size_t n_times = grid.size();
  std::vector<std::vector<double>> coords(dim, std::vector<double>(n_paths * n_times));
  parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
    std::vector<double> c(dim);
    for (std::size_t i = begin; i < end; ++i) {
      PathRng rng(master_seed, options.scenario_id, options.path_offset + i);
      std::fill(c.begin(), c.end(), 0.0);
      c[0] = start;
      for (std::size_t d = 0; d < dim; ++d) coords[d][i * n_times] = c[d];
      for (std::size_t k = 1; k < n_times; ++k) {
        const double s = std::sqrt(grid[k] - grid[k - 1]);
        for (std::size_t d = 0; d < dim; ++d) {
          c[d] += s * rng.normal();
          coords[d][i * n_times + k] = c[d];
        }
      }
    }
  });
  SeedInfo seed{master_seed, options.scenario_id, options.path_offset};
  std::vector<PathEnsemble> out;
  out.reserve(dim);
  for (auto& v : coords) out.push_back(PathEnsemble::monte_carlo(grid, n_paths, std::move(v), seed));
  return out;
}

PathEnsemble realized_quadratic_variation(const PathEnsemble& ensemble) {
  const std::size_t n_times = ensemble.n_times();
  std::vector<double> qv(ensemble.n_paths() * n_times);
  parallel_for(ensemble.n_paths(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto x = ensemble.row(i);
      double acc = 0.0;
      qv[i * n_times] = 0.0;
      for (std::size_t k = 1; k < n_times; ++k) {
        const double d = x[k] - x[k - 1];
        acc += d * d;
        qv[i * n_times + k] = acc;
      }
    }
  });
  return ensemble.with_values(std::move(qv)).with_metadata("derived", "realized_quadratic_variation");
}

}  // namespace localmart
