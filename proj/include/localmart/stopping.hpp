#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "localmart/ensemble.hpp"

namespace localmart {

namespace detail {
struct RuleNode;
struct EventNode;
}  // namespace detail

class EventPredicate;

/// A bounded stopping time evaluated on grid paths.
///
/// Every rule is evaluated through `stopped_by(path, limit)`, which reads only
/// path values with index <= limit and answers whether the rule has fired by
/// then. Resolution is `stopped_by(path, last index)`. Adaptedness therefore
/// holds by construction: a rule cannot look past the time it returns.
///
/// Hit rules compare inclusively (>= level, <= level) unless built strict.
/// FirstDrop uses the strict inequality X_t - X_base < -eps.
class StoppingRule {
 public:
  static StoppingRule deterministic(double t);
  static StoppingRule hit_above(double level, double cap);
  static StoppingRule hit_below(double level, double cap);
  /// First t >= start with X_t >= level (X_t > level when strict), capped.
  static StoppingRule hit_above(double level, double cap, const StoppingRule& start, bool strict = false);
  static StoppingRule hit_below(double level, double cap, const StoppingRule& start, bool strict = false);
  /// First t >= base with X_t - X_base < -eps, capped.
  static StoppingRule first_drop(const StoppingRule& base, double eps, double cap);
  /// base on the event, fallback_t off it. The event must be known at base.
  static StoppingRule restricted(const StoppingRule& base, const EventPredicate& event, double fallback_t);
  /// Minimum of two stopping times.
  static StoppingRule earliest(const StoppingRule& a, const StoppingRule& b);

  /// Upper bound on the resolved time.
  double cap() const;

  /// Smallest grid index at which the rule fires, never beyond cap's index.
  /// Throws DomainError when the cap lies beyond the grid.
  std::size_t resolve(const PathView& path) const;

  /// Resolved index if it is <= limit, reading values [0, limit] only.
  std::optional<std::size_t> stopped_by(const PathView& path, std::size_t limit) const;

  /// Rebuilds the rule with hit levels passed through `level` and drop
  /// thresholds through `drop`; events inside Restricted are rebuilt the same way.
  StoppingRule map_levels(const std::function<double(double)>& level,
                          const std::function<double(double)>& drop) const;

  /// Expression in the scenario grammar.
  std::string describe() const;

 private:
  explicit StoppingRule(std::shared_ptr<const detail::RuleNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::RuleNode> node_;
  friend struct detail::RuleNode;
  friend class EventPredicate;
};

/// An event A in F_tau, evaluated on grid paths with the same adaptedness
/// discipline as StoppingRule.
class EventPredicate {
 public:
  static EventPredicate whole_space();
  static EventPredicate nowhere();
  /// {X_tau < level}
  static EventPredicate value_below_at(const StoppingRule& rule, double level);
  /// {X_tau > level}
  static EventPredicate value_above_at(const StoppingRule& rule, double level);
  /// {X_tau == level}
  static EventPredicate value_equals_at(const StoppingRule& rule, double level);
  /// {tau_later > tau_first}; known at tau_first.
  static EventPredicate strictly_later(const StoppingRule& first, const StoppingRule& later);
  static EventPredicate all_of(std::vector<EventPredicate> parts);
  static EventPredicate any_of(std::vector<EventPredicate> parts);
  static EventPredicate negation(const EventPredicate& e);

  /// Truth value if it is determined by values [0, limit], else nullopt.
  std::optional<bool> known_by(const PathView& path, std::size_t limit) const;
  bool evaluate(const PathView& path) const;
  /// Smallest index by which the value is determined on this path.
  std::size_t determined_at(const PathView& path) const;

  EventPredicate map_levels(const std::function<double(double)>& level,
                            const std::function<double(double)>& drop) const;

  std::string describe() const;

 private:
  explicit EventPredicate(std::shared_ptr<const detail::EventNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::EventNode> node_;
  friend struct detail::EventNode;
  friend class StoppingRule;
};

EventPredicate operator&&(const EventPredicate& a, const EventPredicate& b);
EventPredicate operator||(const EventPredicate& a, const EventPredicate& b);
EventPredicate operator!(const EventPredicate& a);

/// Resolves a rule on every path of an ensemble.
std::vector<std::size_t> resolve_all(const StoppingRule& rule, const PathEnsemble& ensemble);

}  // namespace localmart
