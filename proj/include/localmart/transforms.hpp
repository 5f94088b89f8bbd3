#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "localmart/ensemble.hpp"
#include "localmart/star.hpp"
#include "localmart/strategy.hpp"

namespace localmart {

namespace maps {

struct Affine {
  double alpha = 1.0;
  double beta = 0.0;
};
struct Exp {};
struct Log {};
/// x -> x^p on (0, inf), p > 0.
struct Power {
  double p = 1.0;
};
/// x -> x^{-q} on (0, inf), q > 0; strictly decreasing.
struct NegPower {
  double q = 1.0;
};
/// Linear interpolation between knots (x_i, y_i), extended linearly past
/// both ends with the outer slopes.
struct PiecewiseLinear {
  std::vector<std::pair<double, double>> knots;
  bool strict = true;
};

}  // namespace maps

/// A continuous monotone map of the real line (or of a half-line).
class MonotoneMap {
 public:
  using Variant = std::variant<maps::Affine, maps::Exp, maps::Log, maps::Power, maps::NegPower, maps::PiecewiseLinear>;

  /// Validates parameters; ParameterError on a non-monotone specification.
  explicit MonotoneMap(Variant v);

  static MonotoneMap identity() { return MonotoneMap(maps::Affine{1.0, 0.0}); }

  double operator()(double x) const;
  bool in_domain(double x) const;
  /// True for every variant except NegPower.
  bool increasing() const;
  /// Strictly monotone (a nonstrict piecewise-linear map may have flat pieces).
  bool strict() const;
  /// Largest |f(x) - f(y)| over x, y in [lo, hi] with |x - y| <= eps.
  double modulus(double lo, double hi, double eps) const;
  std::string describe() const;
  const Variant& variant() const noexcept { return v_; }

 private:
  Variant v_;
};

/// Applies the map to every value. DomainError names the first offending
/// path and time.
PathEnsemble apply_monotone(const MonotoneMap& map, const PathEnsemble& ensemble);

/// X - [X, X] / 2 path-wise, with the realized quadratic variation.
PathEnsemble drift_compensate(const PathEnsemble& ensemble);

/// exp(X - [X, X] / 2), exponentiated only at emission. DomainError when a
/// value would overflow; values below the smallest normal double are clamped
/// to it so the output stays strictly positive.
PathEnsemble stochastic_exponential(const PathEnsemble& ensemble);

struct InvarianceReport {
  std::string mode;
  std::string map;
  std::string before;
  std::string after;
  bool pass = false;
  /// For star mode: per probe and epsilon, (p_hat on X, p_hat on f(X)).
  std::vector<std::pair<double, double>> p_hats;
};

/// Runs star_scan on X and on f(X). Stopping times and events stay
/// resolved on X (the filtration does not change); each epsilon becomes the
/// modulus of continuity of f at that epsilon over the ensemble range.
/// Accepts any nondecreasing f.
InvarianceReport star_invariance(const MonotoneMap& map, const PathEnsemble& ensemble,
                                 const std::vector<StarProbe>& probes, const StarOptions& options = {});

/// Runs the long-only single-leg search on X and on f(X) with the same
/// candidate family. Requires a strictly increasing f (ParameterError otherwise).
InvarianceReport s0_invariance(const MonotoneMap& map, const PathEnsemble& ensemble,
                               const std::vector<LegCandidate>& family);

}  // namespace localmart
