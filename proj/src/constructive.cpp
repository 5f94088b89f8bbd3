#include "localmart/constructive.hpp"

#include <algorithm>
#include <stdexcept>

#include "localmart/errors.hpp"

namespace localmart {

ExtractionResult extract_from_violation(const PathEnsemble& ensemble, const ViolationWitness& witness) {
  return extract_from_violation(ensemble, witness, Tolerances::for_ensemble(ensemble));
}

ExtractionResult extract_from_violation(const PathEnsemble& ensemble, const ViolationWitness& witness,
                                        const Tolerances& tol) {
  if (!(witness.epsilon > 0.0)) throw ParameterError("witness epsilon must be positive");
  const StarReport check = star_probe(ensemble, witness.as_probe(), StarOptions{1});
  const StarEntry& e = check.entries.front();
  if (!(e.p_event > 0.0)) throw RefusalError("witness event has no mass on this ensemble");
  if (e.n_joint != 0) {
    throw RefusalError("witness does not hold on this ensemble: " + std::to_string(e.n_joint) +
                       " paths stay above the threshold");
  }

  const double T = witness.horizon;
  const StoppingRule entry = StoppingRule::restricted(witness.tau, witness.event, T);
  const StoppingRule theta = StoppingRule::first_drop(entry, 0.5 * witness.epsilon, T);
  const StoppingRule exit = StoppingRule::restricted(theta, witness.event, T);

  ExtractionResult out;
  out.strategy = SimpleStrategy{{Leg{entry, exit, WeightRule::indicator(witness.event, -1.0)}}, false};
  out.gains = strategy_gain(out.strategy, ensemble);
  out.report = summarize_gains(out.gains, ensemble.weights(), tol);
  out.grid_slack = ensemble.max_step();
  return out;
}

std::optional<ViolationWitness> find_violation_witness(const PathEnsemble& ensemble, const ShortLeg& leg,
                                                       const std::vector<double>& k_grid, double horizon,
                                                       const Tolerances& tol) {
  if (horizon + ensemble.grid().tolerance() < std::max(leg.tau0.cap(), leg.tau1.cap())) {
    throw ParameterError("horizon precedes the leg's stopping times");
  }
  const SimpleStrategy short_leg{{Leg{leg.tau0, leg.tau1, WeightRule::constant(-1.0)}}, false};
  const ArbitrageReport base = arbitrage_verdict(short_leg, ensemble, tol);
  if (base.verdict != ArbitrageVerdict::arbitrage) {
    throw RefusalError("input leg is not an arbitrage on this ensemble (" + to_string(base.verdict) + ")");
  }

  for (double K : k_grid) {
    const EventPredicate A = EventPredicate::value_below_at(leg.tau0, K) && EventPredicate::strictly_later(leg.tau0, leg.tau1);
    const StoppingRule tau0A = StoppingRule::restricted(leg.tau0, A, horizon);
    const StoppingRule tau1A = StoppingRule::restricted(leg.tau1, A, horizon);
    const StoppingRule rise = StoppingRule::hit_above(K + 1.0, horizon, tau0A, /*strict=*/true);
    const StoppingRule tau = StoppingRule::earliest(rise, tau1A);
    const EventPredicate B = A && EventPredicate::strictly_later(tau, tau1A);

    double mass = 0.0;
    for (std::size_t i = 0; i < ensemble.n_paths(); ++i) {
      if (B.evaluate(ensemble.path(i))) mass += ensemble.weight(i);
    }
    if (!(mass > 0.0)) continue;

    ViolationWitness w{tau, B, horizon, 0.5};
    const StarEntry e = star_probe(ensemble, w.as_probe(), StarOptions{1}).entries.front();
    if (e.p_event > 0.0 && e.n_joint == 0) return w;
  }
  return std::nullopt;
}

std::vector<std::vector<double>> leg_gains(const SimpleStrategy& strategy, const PathEnsemble& ensemble) {
  std::vector<std::vector<double>> out(strategy.legs.size(), std::vector<double>(ensemble.n_paths()));
  for (std::size_t i = 0; i < ensemble.n_paths(); ++i) {
    const auto outcomes = resolve_legs(strategy, ensemble.path(i), ensemble.path(i), i);
    for (std::size_t j = 0; j < outcomes.size(); ++j) out[j][i] = outcomes[j].gain;
  }
  return out;
}

namespace {

struct PrefixScan {
  std::vector<std::vector<double>> partial;  // partial[l][i] = sum_{j<=l} gain_j(i), 0-based l
  std::vector<std::vector<double>> weights;  // weights[l][i] = g_l on path i
};

PrefixScan scan_prefixes(const SimpleStrategy& strategy, const PathEnsemble& ensemble) {
  const std::size_t m = strategy.legs.size();
  PrefixScan s{std::vector<std::vector<double>>(m, std::vector<double>(ensemble.n_paths())),
               std::vector<std::vector<double>>(m, std::vector<double>(ensemble.n_paths()))};
  for (std::size_t i = 0; i < ensemble.n_paths(); ++i) {
    const auto outcomes = resolve_legs(strategy, ensemble.path(i), ensemble.path(i), i);
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      acc += outcomes[j].gain;
      s.partial[j][i] = acc;
      s.weights[j][i] = outcomes[j].weight;
    }
  }
  return s;
}

bool some_positive_weight(const std::vector<double>& g, const PathEnsemble& ensemble) {
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (ensemble.weight(i) > 0.0 && g[i] > 0.0) return true;
  }
  return false;
}

}  // namespace

std::optional<std::size_t> minimal_profitable_prefix(const SimpleStrategy& strategy, const PathEnsemble& ensemble) {
  const PrefixScan s = scan_prefixes(strategy, ensemble);
  for (std::size_t l = 0; l < strategy.legs.size(); ++l) {
    if (!some_positive_weight(s.weights[l], ensemble)) continue;
    if (is_strictly_positive_class(s.partial[l], ensemble.weights(), 0.0)) return l + 1;
  }
  return std::nullopt;
}

ReductionResult reduce_to_single_leg(const PathEnsemble& ensemble, const SimpleStrategy& strategy) {
  if (!ensemble.is_exact()) throw RefusalError("single-leg reduction needs an exact finite ensemble");
  if (!strategy.shortsale_restricted) throw RefusalError("single-leg reduction needs a short-sale restricted strategy");
  const ArbitrageReport input = arbitrage_verdict(strategy, ensemble, Tolerances::exact());
  if (input.verdict != ArbitrageVerdict::arbitrage) {
    throw RefusalError("input strategy is not an exact arbitrage (" + to_string(input.verdict) + ")");
  }

  ReductionResult out;
  if (strategy.legs.size() == 1) {
    out.strategy = strategy;
    out.gains = strategy_gain(strategy, ensemble);
    out.report = input;
    out.k = 1;
    out.which = ReductionCase::unchanged;
    return out;
  }

  const auto k = minimal_profitable_prefix(strategy, ensemble);
  if (!k) throw std::logic_error("no profitable prefix found for a verified arbitrage");
  const std::size_t kk = *k - 1;
  const Leg& chosen = strategy.legs[kk];

  bool prefix_vanishes = true;
  if (kk > 0) {
    const PrefixScan s = scan_prefixes(strategy, ensemble);
    for (std::size_t i = 0; i < ensemble.n_paths(); ++i) {
      if (ensemble.weight(i) > 0.0 && s.partial[kk - 1][i] != 0.0) prefix_vanishes = false;
    }
  }

  WeightRule weight = WeightRule::constant(0.0);
  if (prefix_vanishes) {
    weight = WeightRule::positive_indicator(chosen.weight, 1.0);
    out.which = ReductionCase::positive_weight;
  } else {
    std::vector<Leg> prefix(strategy.legs.begin(), strategy.legs.begin() + static_cast<std::ptrdiff_t>(kk));
    weight = WeightRule::partial_sum_negative(std::move(prefix), 1.0);
    out.which = ReductionCase::negative_partial_sum;
  }
  out.strategy = SimpleStrategy{{Leg{chosen.entry, chosen.exit, weight}}, true};
  out.k = *k;
  out.gains = strategy_gain(out.strategy, ensemble);
  out.report = summarize_gains(out.gains, ensemble.weights(), Tolerances::exact());
  if (!is_strictly_positive_class(out.gains, ensemble.weights(), 0.0)) {
    throw std::logic_error("reduced strategy is not strictly positive; case analysis violated");
  }
  return out;
}

}  // namespace localmart
