#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "localmart/ensemble.hpp"
#include "localmart/stopping.hpp"

namespace localmart {

namespace detail {
struct WeightNode;
}

struct Leg;

/// Position size g_j of one leg, measurable at the leg's entry time.
class WeightRule {
 public:
  static WeightRule constant(double c);
  /// c * 1_A; A must be known at the entry time.
  static WeightRule indicator(const EventPredicate& event, double c);
  /// c * 1{sum of the prefix legs' gains < 0}; prefix legs must close by entry.
  static WeightRule partial_sum_negative(std::vector<Leg> prefix, double c);
  /// c * 1{inner > 0}.
  static WeightRule positive_indicator(const WeightRule& inner, double c);
  /// Sum of several weights.
  static WeightRule sum(std::vector<WeightRule> parts);

  /// Value on `path` for a leg entered at grid index `entry`. Throws
  /// ConstraintViolation when the weight is not known at entry.
  double evaluate(const PathView& path, std::size_t entry) const;

  WeightRule scaled(double factor) const;
  std::string describe() const;

 private:
  explicit WeightRule(std::shared_ptr<const detail::WeightNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::WeightNode> node_;
  friend struct detail::WeightNode;
};

/// One holding period (entry, exit] with size `weight`.
struct Leg {
  StoppingRule entry;
  StoppingRule exit;
  WeightRule weight;
};

/// g_1 1_(t1,t2] + ... + g_{n-1} 1_(t_{n-1},t_n]. The time-0 bond position
/// earns nothing with a constant numeraire and is not represented.
struct SimpleStrategy {
  std::vector<Leg> legs;
  bool shortsale_restricted = false;

  std::string describe() const;
};

SimpleStrategy concatenate(const SimpleStrategy& a, const SimpleStrategy& b);
SimpleStrategy negate(const SimpleStrategy& s);

/// Per-path gain of one leg: g(path) * (X_exit - X_entry), plus the resolved indices.
struct LegOutcome {
  std::size_t entry = 0;
  std::size_t exit = 0;
  double weight = 0.0;
  double gain = 0.0;
};

/// Resolves every leg on one path. Throws StructuralError on out-of-order
/// or overlapping legs. `signals` drives the stopping rules and weights,
/// `prices` supplies the increments; pass the same path for both normally.
std::vector<LegOutcome> resolve_legs(const SimpleStrategy& strategy, const PathView& signals,
                                     const PathView& prices, std::size_t path_index);

/// (H . X) per path.
std::vector<double> strategy_gain(const SimpleStrategy& strategy, const PathEnsemble& ensemble);
std::vector<double> strategy_gain(const SimpleStrategy& strategy, const PathEnsemble& signals,
                                  const PathEnsemble& prices);

/// True iff every positive-weight sample is >= -tol and some positive-weight
/// sample is > tol: the empirical form of membership in L0_{++}.
bool is_strictly_positive_class(std::span<const double> samples, std::span<const double> weights, double tol_zero);

struct Tolerances {
  double tol_zero = 0.0;
  std::size_t min_hits = 1;

  /// Zero tolerance, one hit: for exact ensembles.
  static Tolerances exact();
  /// 1e-9 * price scale, ceil(1e-3 n) hits.
  static Tolerances monte_carlo(std::size_t n_paths, double price_scale);
  /// Picks exact() or monte_carlo() from the ensemble kind.
  static Tolerances for_ensemble(const PathEnsemble& ensemble);
};

enum class ArbitrageVerdict { arbitrage, no_arbitrage_evidence, inconclusive };
std::string to_string(ArbitrageVerdict v);

struct ArbitrageReport {
  double min_gain = 0.0;
  double max_gain = 0.0;
  double mean_gain = 0.0;
  double frac_positive = 0.0;
  double frac_negative = 0.0;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  std::size_t n_paths = 0;
  Tolerances tolerances;
  ArbitrageVerdict verdict = ArbitrageVerdict::inconclusive;
};

/// Summarizes gains. ARBITRAGE iff min gain >= -tol_zero and at least
/// min_hits positive-weight paths gain more than tol_zero; NO_ARBITRAGE_EVIDENCE
/// when some path loses or no path gains; INCONCLUSIVE otherwise.
ArbitrageReport summarize_gains(std::span<const double> gains, std::span<const double> weights,
                                const Tolerances& tol);

/// Verdict for a strategy; short-sale restricted strategies are first checked
/// for non-negative weights on every path (ConstraintViolation otherwise).
ArbitrageReport arbitrage_verdict(const SimpleStrategy& strategy, const PathEnsemble& ensemble,
                                  const Tolerances& tol);
ArbitrageReport arbitrage_verdict(const SimpleStrategy& strategy, const PathEnsemble& signals,
                                  const PathEnsemble& prices, const Tolerances& tol);

/// Candidate single leg: hold on (entry, exit] on `event`.
struct LegCandidate {
  StoppingRule entry;
  StoppingRule exit;
  EventPredicate event;

  std::string describe() const;
};

struct CandidateResult {
  std::size_t index = 0;
  double sign = 1.0;
  ArbitrageReport report;
};

struct SearchResult {
  SimpleStrategy best;
  std::size_t best_index = 0;
  double best_sign = 1.0;
  ArbitrageReport report;
  /// Every (candidate, sign) evaluation in family order, + before -.
  std::vector<CandidateResult> candidates;
  /// ARBITRAGE if any candidate is; NO_ARBITRAGE_EVIDENCE if all are; else INCONCLUSIVE.
  ArbitrageVerdict verdict = ArbitrageVerdict::inconclusive;
};

/// Tries sign * 1_A 1_(entry, exit] for every candidate; signs are {+1} under
/// the short-sale restriction and {+1, -1} otherwise. The best candidate is an
/// ARBITRAGE one if any exists, otherwise the one with the largest minimum gain
/// among those with some positive gain, otherwise the first evaluated.
SearchResult search_single_leg(const PathEnsemble& ensemble, const std::vector<LegCandidate>& family,
                               bool shortsale_restricted, const Tolerances& tol);
SearchResult search_single_leg(const PathEnsemble& signals, const PathEnsemble& prices,
                               const std::vector<LegCandidate>& family, bool shortsale_restricted,
                               const Tolerances& tol);

}  // namespace localmart
