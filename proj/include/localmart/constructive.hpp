#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "localmart/ensemble.hpp"
#include "localmart/star.hpp"
#include "localmart/stopping.hpp"
#include "localmart/strategy.hpp"

namespace localmart {

/// (tau, A, T, eps) with P(A and inf_[tau,T](X - X_tau) > -eps) = 0 and P(A) > 0.
struct ViolationWitness {
  StoppingRule tau;
  EventPredicate event;
  double horizon = 1.0;
  double epsilon = 0.5;

  StarProbe as_probe() const { return {tau, event, horizon, {epsilon}}; }
};

struct ExtractionResult {
  SimpleStrategy strategy;
  ArbitrageReport report;
  std::vector<double> gains;
  /// Largest single-step move on the ensemble; bounds the overshoot of the
  /// exit time past the drop level.
  double grid_slack = 0.0;
};

/// Builds the short position -1_A on (tau^A, theta^A], where tau^A is tau on A
/// and T off A, theta is the first time after tau^A that X falls more than
/// eps/2 below X_{tau^A} (capped at T), and theta^A is theta on A and T off A.
/// Refuses (RefusalError) when the witness does not hold on this ensemble.
ExtractionResult extract_from_violation(const PathEnsemble& ensemble, const ViolationWitness& witness,
                                        const Tolerances& tol);
ExtractionResult extract_from_violation(const PathEnsemble& ensemble, const ViolationWitness& witness);

/// Bounded stopping times of an arbitrage -1_(tau0, tau1].
struct ShortLeg {
  StoppingRule tau0;
  StoppingRule tau1;
};

/// Follows the sufficiency argument: for each level K, A = {X_tau0 < K} and
/// {tau1 > tau0}; tau = (first time after tau0^A with X > K + 1) ^ tau1^A;
/// B = A and {tau < tau1^A}. Returns (tau, B, T, 1/2) for the first K whose B
/// has positive probability and whose probe shows no path staying above, or
/// nullopt. Refuses when -1_(tau0, tau1] is not an arbitrage on the ensemble.
std::optional<ViolationWitness> find_violation_witness(const PathEnsemble& ensemble, const ShortLeg& leg,
                                                       const std::vector<double>& k_grid, double horizon,
                                                       const Tolerances& tol);

enum class ReductionCase {
  /// Partial sum through k-1 vanishes: C = {g_k > 0}.
  positive_weight,
  /// Partial sum through k-1 is negative with positive probability: C = {sum < 0}.
  negative_partial_sum,
  /// Input was already a single leg.
  unchanged,
};

struct ReductionResult {
  SimpleStrategy strategy;
  ArbitrageReport report;
  std::vector<double> gains;
  /// 1-based index of the selected leg.
  std::size_t k = 0;
  ReductionCase which = ReductionCase::unchanged;
};

/// Per-leg gains g_j (X_{tau_{j+1}} - X_{tau_j}), indexed [leg][path].
std::vector<std::vector<double>> leg_gains(const SimpleStrategy& strategy, const PathEnsemble& ensemble);

/// Smallest l (1-based) whose partial sum through l is >= 0 on every
/// positive-weight path and > 0 on some, with leg l's weight positive somewhere.
std::optional<std::size_t> minimal_profitable_prefix(const SimpleStrategy& strategy, const PathEnsemble& ensemble);

/// Reduces a short-sale restricted multi-leg arbitrage on an exact ensemble
/// to a single indicator leg 1_C 1_(tau_k, tau_{k+1}] whose gain is in L0_{++}.
ReductionResult reduce_to_single_leg(const PathEnsemble& ensemble, const SimpleStrategy& strategy);

}  // namespace localmart
