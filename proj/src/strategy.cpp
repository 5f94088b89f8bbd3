#include "localmart/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <variant>

#include "localmart/errors.hpp"
#include "localmart/format.hpp"
#include "localmart/parallel.hpp"

namespace localmart {
namespace detail {

struct WeightNode {
  struct Constant {
    double c;
  };
  struct Indicator {
    EventPredicate event;
    double c;
  };
  struct PartialSumNegative {
    std::vector<Leg> prefix;
    double c;
  };
  struct PositiveIndicator {
    WeightRule inner;
    double c;
  };
  struct Sum {
    std::vector<WeightRule> parts;
  };
  std::variant<Constant, Indicator, PartialSumNegative, PositiveIndicator, Sum> kind;

  static WeightRule make(WeightNode n) { return WeightRule(std::make_shared<const WeightNode>(std::move(n))); }
};

}  // namespace detail

namespace {

using detail::WeightNode;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_finite(double c) {
  if (!std::isfinite(c)) throw ParameterError("weight must be finite");
}

}  // namespace

WeightRule WeightRule::constant(double c) {
  check_finite(c);
  return WeightNode::make({WeightNode::Constant{c}});
}

WeightRule WeightRule::indicator(const EventPredicate& event, double c) {
  check_finite(c);
  return WeightNode::make({WeightNode::Indicator{event, c}});
}

WeightRule WeightRule::partial_sum_negative(std::vector<Leg> prefix, double c) {
  check_finite(c);
  return WeightNode::make({WeightNode::PartialSumNegative{std::move(prefix), c}});
}

WeightRule WeightRule::positive_indicator(const WeightRule& inner, double c) {
  check_finite(c);
  return WeightNode::make({WeightNode::PositiveIndicator{inner, c}});
}

WeightRule WeightRule::sum(std::vector<WeightRule> parts) {
  if (parts.empty()) return constant(0.0);
  if (parts.size() == 1) return parts.front();
  return WeightNode::make({WeightNode::Sum{std::move(parts)}});
}

double WeightRule::evaluate(const PathView& path, std::size_t entry) const {
  return std::visit(
      overloaded{
          [](const WeightNode::Constant& w) { return w.c; },
          [&](const WeightNode::Indicator& w) {
            auto in = w.event.known_by(path, entry);
            if (!in) throw ConstraintViolation("weight event is not known at the entry time: " + w.event.describe());
            return *in ? w.c : 0.0;
          },
          [&](const WeightNode::PartialSumNegative& w) {
            double acc = 0.0;
            for (const auto& leg : w.prefix) {
              auto e = leg.entry.stopped_by(path, entry);
              auto x = leg.exit.stopped_by(path, entry);
              if (!e || !x) throw ConstraintViolation("prefix leg is not closed at the entry time");
              acc += leg.weight.evaluate(path, *e) * (path[*x] - path[*e]);
            }
            return acc < 0.0 ? w.c : 0.0;
          },
          [&](const WeightNode::PositiveIndicator& w) { return w.inner.evaluate(path, entry) > 0.0 ? w.c : 0.0; },
          [&](const WeightNode::Sum& w) {
            double acc = 0.0;
            for (const auto& p : w.parts) acc += p.evaluate(path, entry);
            return acc;
          },
      },
      node_->kind);
}

WeightRule WeightRule::scaled(double factor) const {
  return std::visit(overloaded{
                        [&](const WeightNode::Constant& w) { return constant(w.c * factor); },
                        [&](const WeightNode::Indicator& w) { return indicator(w.event, w.c * factor); },
                        [&](const WeightNode::PartialSumNegative& w) {
                          return partial_sum_negative(w.prefix, w.c * factor);
                        },
                        [&](const WeightNode::PositiveIndicator& w) {
                          return positive_indicator(w.inner, w.c * factor);
                        },
                        [&](const WeightNode::Sum& w) {
                          std::vector<WeightRule> parts;
                          for (const auto& p : w.parts) parts.push_back(p.scaled(factor));
                          return sum(std::move(parts));
                        },
                    },
                    node_->kind);
}

std::string WeightRule::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const WeightNode::Constant& w) { os << "constant(" << fmt_num(w.c) << ")"; },
                 [&](const WeightNode::Indicator& w) {
                   os << "indicator(" << w.event.describe() << ", " << fmt_num(w.c) << ")";
                 },
                 [&](const WeightNode::PartialSumNegative& w) {
                   SimpleStrategy prefix{w.prefix, false};
                   os << "partial_sum_negative([" << prefix.describe() << "], " << fmt_num(w.c) << ")";
                 },
                 [&](const WeightNode::PositiveIndicator& w) {
                   os << "positive_indicator(" << w.inner.describe() << ", " << fmt_num(w.c) << ")";
                 },
                 [&](const WeightNode::Sum& w) {
                   os << "sum(";
                   for (std::size_t i = 0; i < w.parts.size(); ++i) os << (i ? ", " : "") << w.parts[i].describe();
                   os << ")";
                 },
             },
             node_->kind);
  return os.str();
}

std::string SimpleStrategy::describe() const {
  std::ostringstream os;
  for (std::size_t j = 0; j < legs.size(); ++j) {
    if (j) os << "; ";
    os << "leg(" << legs[j].entry.describe() << ", " << legs[j].exit.describe() << ", "
       << legs[j].weight.describe() << ")";
  }
  if (legs.empty()) os << "empty";
  return os.str();
}

SimpleStrategy concatenate(const SimpleStrategy& a, const SimpleStrategy& b) {
  SimpleStrategy out{a.legs, a.shortsale_restricted && b.shortsale_restricted};
  out.legs.insert(out.legs.end(), b.legs.begin(), b.legs.end());
  return out;
}

SimpleStrategy negate(const SimpleStrategy& s) {
  SimpleStrategy out{{}, false};
  for (const auto& leg : s.legs) out.legs.push_back({leg.entry, leg.exit, leg.weight.scaled(-1.0)});
  return out;
}

std::vector<LegOutcome> resolve_legs(const SimpleStrategy& strategy, const PathView& signals,
                                     const PathView& prices, std::size_t path_index) {
  std::vector<LegOutcome> out;
  out.reserve(strategy.legs.size());
  std::size_t previous_exit = 0;
  for (std::size_t j = 0; j < strategy.legs.size(); ++j) {
    const Leg& leg = strategy.legs[j];
    LegOutcome o;
    o.entry = leg.entry.resolve(signals);
    o.exit = leg.exit.resolve(signals);
    if (o.exit < o.entry) throw StructuralError("leg " + std::to_string(j + 1) + " exits before it enters", path_index);
    if (j > 0 && o.entry < previous_exit) {
      throw StructuralError("leg " + std::to_string(j + 1) + " overlaps the previous leg", path_index);
    }
    previous_exit = o.exit;
    o.weight = leg.weight.evaluate(signals, o.entry);
    o.gain = o.weight * (prices[o.exit] - prices[o.entry]);
    out.push_back(o);
  }
  return out;
}

namespace {

void check_compatible(const PathEnsemble& signals, const PathEnsemble& prices) {
  if (signals.n_paths() != prices.n_paths() || !(signals.grid() == prices.grid())) {
    throw ParameterError("signal and price ensembles must share paths and grid");
  }
}

// Gains plus, when requested, the smallest weight seen on each path.
std::vector<double> compute_gains(const SimpleStrategy& strategy, const PathEnsemble& signals,
                                  const PathEnsemble& prices, bool enforce_shortsale) {
  check_compatible(signals, prices);
  std::vector<double> gains(signals.n_paths(), 0.0);
  parallel_for(signals.n_paths(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double g = 0.0;
      for (const auto& o : resolve_legs(strategy, signals.path(i), prices.path(i), i)) {
        if (enforce_shortsale && o.weight < 0.0) {
          throw ConstraintViolation("negative weight under the short-sale restriction on path " + std::to_string(i));
        }
        g += o.gain;
      }
      gains[i] = g;
    }
  });
  return gains;
}

}  // namespace

std::vector<double> strategy_gain(const SimpleStrategy& strategy, const PathEnsemble& ensemble) {
  return compute_gains(strategy, ensemble, ensemble, false);
}

std::vector<double> strategy_gain(const SimpleStrategy& strategy, const PathEnsemble& signals,
                                  const PathEnsemble& prices) {
  return compute_gains(strategy, signals, prices, false);
}

bool is_strictly_positive_class(std::span<const double> samples, std::span<const double> weights, double tol_zero) {
  if (samples.size() != weights.size()) throw ParameterError("samples and weights differ in length");
  bool some_positive = false;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(weights[i] > 0.0)) continue;
    if (samples[i] < -tol_zero) return false;
    if (samples[i] > tol_zero) some_positive = true;
  }
  return some_positive;
}

Tolerances Tolerances::exact() { return {0.0, 1}; }

Tolerances Tolerances::monte_carlo(std::size_t n_paths, double price_scale) {
  const auto hits = static_cast<std::size_t>(std::ceil(1e-3 * static_cast<double>(n_paths)));
  return {1e-9 * std::abs(price_scale), std::max<std::size_t>(1, hits)};
}

Tolerances Tolerances::for_ensemble(const PathEnsemble& ensemble) {
  if (ensemble.is_exact()) return exact();
  const double scale = std::max(std::abs(ensemble.min_value()), std::abs(ensemble.max_value()));
  return monte_carlo(ensemble.n_paths(), scale);
}

std::string to_string(ArbitrageVerdict v) {
  switch (v) {
    case ArbitrageVerdict::arbitrage:
      return "ARBITRAGE";
    case ArbitrageVerdict::no_arbitrage_evidence:
      return "NO_ARBITRAGE_EVIDENCE";
    case ArbitrageVerdict::inconclusive:
      return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

ArbitrageReport summarize_gains(std::span<const double> gains, std::span<const double> weights,
                                const Tolerances& tol) {
  if (gains.size() != weights.size()) throw ParameterError("gains and weights differ in length");
  ArbitrageReport r;
  r.tolerances = tol;
  r.n_paths = gains.size();
  r.min_gain = std::numeric_limits<double>::infinity();
  r.max_gain = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gains.size(); ++i) {
    const double w = weights[i];
    if (!(w > 0.0)) continue;
    const double g = gains[i];
    r.min_gain = std::min(r.min_gain, g);
    r.max_gain = std::max(r.max_gain, g);
    r.mean_gain += w * g;
    if (g > tol.tol_zero) {
      r.frac_positive += w;
      ++r.n_positive;
    } else if (g < -tol.tol_zero) {
      r.frac_negative += w;
      ++r.n_negative;
    }
  }
  if (!gains.empty() && is_uniform(weights)) {
    const double n = static_cast<double>(gains.size());
    double sum = 0.0;
    for (double g : gains) sum += g;
    r.mean_gain = sum / n;
    r.frac_positive = static_cast<double>(r.n_positive) / n;
    r.frac_negative = static_cast<double>(r.n_negative) / n;
  }
  if (r.min_gain >= -tol.tol_zero && r.n_positive >= tol.min_hits) {
    r.verdict = ArbitrageVerdict::arbitrage;
  } else if (r.min_gain < -tol.tol_zero || r.n_positive == 0) {
    r.verdict = ArbitrageVerdict::no_arbitrage_evidence;
  } else {
    r.verdict = ArbitrageVerdict::inconclusive;
  }
  return r;
}

ArbitrageReport arbitrage_verdict(const SimpleStrategy& strategy, const PathEnsemble& ensemble,
                                  const Tolerances& tol) {
  return arbitrage_verdict(strategy, ensemble, ensemble, tol);
}

ArbitrageReport arbitrage_verdict(const SimpleStrategy& strategy, const PathEnsemble& signals,
                                  const PathEnsemble& prices, const Tolerances& tol) {
  const auto gains = compute_gains(strategy, signals, prices, strategy.shortsale_restricted);
  return summarize_gains(gains, signals.weights(), tol);
}

std::string LegCandidate::describe() const {
  return entry.describe() + ", " + exit.describe() + ", " + event.describe();
}

SearchResult search_single_leg(const PathEnsemble& ensemble, const std::vector<LegCandidate>& family,
                               bool shortsale_restricted, const Tolerances& tol) {
  return search_single_leg(ensemble, ensemble, family, shortsale_restricted, tol);
}

SearchResult search_single_leg(const PathEnsemble& signals, const PathEnsemble& prices,
                               const std::vector<LegCandidate>& family, bool shortsale_restricted,
                               const Tolerances& tol) {
  if (family.empty()) throw ParameterError("single-leg search needs a non-empty candidate family");
  const std::vector<double> signs = shortsale_restricted ? std::vector<double>{1.0} : std::vector<double>{1.0, -1.0};

  auto make = [&](std::size_t idx, double sign) {
    const auto& c = family[idx];
    return SimpleStrategy{{Leg{c.entry, c.exit, WeightRule::indicator(c.event, sign)}}, shortsale_restricted};
  };

  SearchResult out{make(0, signs.front()), 0, signs.front(), {}, {}, ArbitrageVerdict::inconclusive};
  std::optional<std::size_t> best;
  auto better = [](const ArbitrageReport& a, const ArbitrageReport& b) {
    const bool aa = a.verdict == ArbitrageVerdict::arbitrage;
    const bool ba = b.verdict == ArbitrageVerdict::arbitrage;
    if (aa != ba) return aa;
    return a.min_gain > b.min_gain;
  };
  bool all_no_evidence = true;
  bool any_arbitrage = false;
  for (std::size_t idx = 0; idx < family.size(); ++idx) {
    for (double sign : signs) {
      CandidateResult cr{idx, sign, arbitrage_verdict(make(idx, sign), signals, prices, tol)};
      all_no_evidence = all_no_evidence && cr.report.verdict == ArbitrageVerdict::no_arbitrage_evidence;
      any_arbitrage = any_arbitrage || cr.report.verdict == ArbitrageVerdict::arbitrage;
      if (cr.report.frac_positive > 0.0 && (!best || better(cr.report, out.candidates[*best].report))) {
        best = out.candidates.size();
      }
      out.candidates.push_back(cr);
    }
  }
  const CandidateResult& chosen = out.candidates[best.value_or(0)];
  out.best = make(chosen.index, chosen.sign);
  out.best_index = chosen.index;
  out.best_sign = chosen.sign;
  out.report = chosen.report;
  out.verdict = any_arbitrage     ? ArbitrageVerdict::arbitrage
                : all_no_evidence ? ArbitrageVerdict::no_arbitrage_evidence
                                  : ArbitrageVerdict::inconclusive;
  return out;
}

}  // namespace localmart
