#include "localmart/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <variant>

#include "localmart/errors.hpp"
#include "localmart/format.hpp"

namespace localmart {
namespace detail {

struct RuleNode {
  struct Deterministic {
    double t;
  };
  struct Hit {
    double level;
    bool above;
    bool strict;
    std::optional<StoppingRule> start;
  };
  struct FirstDrop {
    StoppingRule base;
    double eps;
  };
  struct Restricted {
    StoppingRule base;
    EventPredicate event;
    double fallback;
  };
  struct Earliest {
    StoppingRule a;
    StoppingRule b;
  };

  std::variant<Deterministic, Hit, FirstDrop, Restricted, Earliest> kind;
  double cap;

  static StoppingRule make(RuleNode node) { return StoppingRule(std::make_shared<const RuleNode>(std::move(node))); }
  static const RuleNode& of(const StoppingRule& r) { return *r.node_; }
};

struct EventNode {
  enum class Compare { below, above, equal };
  struct Whole {};
  struct Nowhere {};
  struct ValueAt {
    StoppingRule rule;
    double level;
    Compare cmp;
  };
  struct Later {
    StoppingRule first;
    StoppingRule later;
  };
  struct AllOf {
    std::vector<EventPredicate> parts;
  };
  struct AnyOf {
    std::vector<EventPredicate> parts;
  };
  struct Not {
    EventPredicate inner;
  };

  std::variant<Whole, Nowhere, ValueAt, Later, AllOf, AnyOf, Not> kind;

  static EventPredicate make(EventNode node) {
    return EventPredicate(std::make_shared<const EventNode>(std::move(node)));
  }
  static const EventNode& of(const EventPredicate& e) { return *e.node_; }
};

}  // namespace detail

namespace {

using detail::EventNode;
using detail::RuleNode;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw ParameterError(std::string(what) + " must be finite");
}

void check_time(double t, const char* what) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw ParameterError(std::string(what) + " must be a non-negative time");
}

void check_nested_cap(const StoppingRule& inner, double cap) {
  if (inner.cap() > cap + 1e-12 * std::max(1.0, cap)) {
    throw ParameterError("nested rule cap exceeds the enclosing cap");
  }
}

std::size_t cap_index(double cap, const PathView& path) { return path.grid->index_at_or_before(cap); }

}  // namespace

// ---------------------------------------------------------------------------
// StoppingRule

StoppingRule StoppingRule::deterministic(double t) {
  check_time(t, "deterministic time");
  return RuleNode::make({RuleNode::Deterministic{t}, t});
}

StoppingRule StoppingRule::hit_above(double level, double cap) {
  check_finite(level, "level");
  check_time(cap, "cap");
  return RuleNode::make({RuleNode::Hit{level, true, false, std::nullopt}, cap});
}

StoppingRule StoppingRule::hit_below(double level, double cap) {
  check_finite(level, "level");
  check_time(cap, "cap");
  return RuleNode::make({RuleNode::Hit{level, false, false, std::nullopt}, cap});
}

StoppingRule StoppingRule::hit_above(double level, double cap, const StoppingRule& start, bool strict) {
  check_finite(level, "level");
  check_time(cap, "cap");
  check_nested_cap(start, cap);
  return RuleNode::make({RuleNode::Hit{level, true, strict, start}, cap});
}

StoppingRule StoppingRule::hit_below(double level, double cap, const StoppingRule& start, bool strict) {
  check_finite(level, "level");
  check_time(cap, "cap");
  check_nested_cap(start, cap);
  return RuleNode::make({RuleNode::Hit{level, false, strict, start}, cap});
}

StoppingRule StoppingRule::first_drop(const StoppingRule& base, double eps, double cap) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw ParameterError("drop threshold must be non-negative");
  check_time(cap, "cap");
  check_nested_cap(base, cap);
  return RuleNode::make({RuleNode::FirstDrop{base, eps}, cap});
}

StoppingRule StoppingRule::restricted(const StoppingRule& base, const EventPredicate& event, double fallback_t) {
  check_time(fallback_t, "fallback time");
  check_nested_cap(base, fallback_t);
  return RuleNode::make({RuleNode::Restricted{base, event, fallback_t}, fallback_t});
}

StoppingRule StoppingRule::earliest(const StoppingRule& a, const StoppingRule& b) {
  return RuleNode::make({RuleNode::Earliest{a, b}, std::min(a.cap(), b.cap())});
}

double StoppingRule::cap() const { return node_->cap; }

std::size_t StoppingRule::resolve(const PathView& path) const {
  const std::size_t last = path.size() - 1;
  auto r = stopped_by(path, last);
  if (!r) throw DomainError("stopping rule did not resolve within the grid: " + describe());
  return *r;
}

std::optional<std::size_t> StoppingRule::stopped_by(const PathView& path, std::size_t limit) const {
  const RuleNode& n = *node_;
  const std::size_t c = cap_index(n.cap, path);
  return std::visit(
      overloaded{
          [&](const RuleNode::Deterministic&) -> std::optional<std::size_t> {
            if (c <= limit) return c;
            return std::nullopt;
          },
          [&](const RuleNode::Hit& h) -> std::optional<std::size_t> {
            std::size_t from = 0;
            if (h.start) {
              auto s = h.start->stopped_by(path, limit);
              if (!s) return std::nullopt;
              from = *s;
            }
            const std::size_t stop = std::min(limit, c);
            for (std::size_t k = from; k <= stop; ++k) {
              const double x = path[k];
              const bool hit = h.above ? (h.strict ? x > h.level : x >= h.level)
                                       : (h.strict ? x < h.level : x <= h.level);
              if (hit) return k;
            }
            if (c <= limit) return c;
            return std::nullopt;
          },
          [&](const RuleNode::FirstDrop& d) -> std::optional<std::size_t> {
            auto b = d.base.stopped_by(path, limit);
            if (!b) return std::nullopt;
            const double ref = path[*b];
            const std::size_t stop = std::min(limit, c);
            for (std::size_t k = *b; k <= stop; ++k) {
              if (path[k] - ref < -d.eps) return k;
            }
            if (c <= limit) return c;
            return std::nullopt;
          },
          [&](const RuleNode::Restricted& r) -> std::optional<std::size_t> {
            auto b = r.base.stopped_by(path, limit);
            if (!b) return std::nullopt;
            auto in_event = r.event.known_by(path, *b);
            if (!in_event) {
              throw DomainError("restricting event is not known at the base stopping time: " + r.event.describe());
            }
            if (*in_event) return b;
            if (c <= limit) return c;
            return std::nullopt;
          },
          [&](const RuleNode::Earliest& e) -> std::optional<std::size_t> {
            auto a = e.a.stopped_by(path, limit);
            auto b = e.b.stopped_by(path, limit);
            if (a && b) return std::min(*a, *b);
            if (a) return a;
            return b;
          },
      },
      n.kind);
}

StoppingRule StoppingRule::map_levels(const std::function<double(double)>& level,
                                      const std::function<double(double)>& drop) const {
  const RuleNode& n = *node_;
  return std::visit(overloaded{
                        [&](const RuleNode::Deterministic&) { return *this; },
                        [&](const RuleNode::Hit& h) {
                          RuleNode copy = n;
                          auto& hh = std::get<RuleNode::Hit>(copy.kind);
                          hh.level = level(h.level);
                          if (h.start) hh.start = h.start->map_levels(level, drop);
                          return RuleNode::make(std::move(copy));
                        },
                        [&](const RuleNode::FirstDrop& d) {
                          return RuleNode::make(
                              {RuleNode::FirstDrop{d.base.map_levels(level, drop), drop(d.eps)}, n.cap});
                        },
                        [&](const RuleNode::Restricted& r) {
                          return RuleNode::make({RuleNode::Restricted{r.base.map_levels(level, drop),
                                                                      r.event.map_levels(level, drop), r.fallback},
                                                 n.cap});
                        },
                        [&](const RuleNode::Earliest& e) {
                          return RuleNode::make(
                              {RuleNode::Earliest{e.a.map_levels(level, drop), e.b.map_levels(level, drop)}, n.cap});
                        },
                    },
                    n.kind);
}

std::string StoppingRule::describe() const {
  const RuleNode& n = *node_;
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const RuleNode::Deterministic& d) { os << "deterministic(" << fmt_num(d.t) << ")"; },
                 [&](const RuleNode::Hit& h) {
                   os << (h.above ? "hit_above(" : "hit_below(") << fmt_num(h.level);
                   if (h.start) os << ", " << h.start->describe();
                   if (h.strict) os << ", strict";
                   os << ") cap " << fmt_num(n.cap);
                 },
                 [&](const RuleNode::FirstDrop& d) {
                   os << "first_drop(" << d.base.describe() << ", " << fmt_num(d.eps) << ") cap " << fmt_num(n.cap);
                 },
                 [&](const RuleNode::Restricted& r) {
                   os << "restricted(" << r.base.describe() << ", " << r.event.describe() << ", "
                      << fmt_num(r.fallback) << ")";
                 },
                 [&](const RuleNode::Earliest& e) {
                   os << "earliest(" << e.a.describe() << ", " << e.b.describe() << ")";
                 },
             },
             n.kind);
  return os.str();
}

// ---------------------------------------------------------------------------
// EventPredicate

EventPredicate EventPredicate::whole_space() { return EventNode::make({EventNode::Whole{}}); }

EventPredicate EventPredicate::nowhere() { return EventNode::make({EventNode::Nowhere{}}); }

EventPredicate EventPredicate::value_below_at(const StoppingRule& rule, double level) {
  check_finite(level, "level");
  return EventNode::make({EventNode::ValueAt{rule, level, EventNode::Compare::below}});
}

EventPredicate EventPredicate::value_above_at(const StoppingRule& rule, double level) {
  check_finite(level, "level");
  return EventNode::make({EventNode::ValueAt{rule, level, EventNode::Compare::above}});
}

EventPredicate EventPredicate::value_equals_at(const StoppingRule& rule, double level) {
  check_finite(level, "level");
  return EventNode::make({EventNode::ValueAt{rule, level, EventNode::Compare::equal}});
}

EventPredicate EventPredicate::strictly_later(const StoppingRule& first, const StoppingRule& later) {
  return EventNode::make({EventNode::Later{first, later}});
}

EventPredicate EventPredicate::all_of(std::vector<EventPredicate> parts) {
  if (parts.empty()) return whole_space();
  if (parts.size() == 1) return parts.front();
  return EventNode::make({EventNode::AllOf{std::move(parts)}});
}

EventPredicate EventPredicate::any_of(std::vector<EventPredicate> parts) {
  if (parts.empty()) return nowhere();
  if (parts.size() == 1) return parts.front();
  return EventNode::make({EventNode::AnyOf{std::move(parts)}});
}

EventPredicate EventPredicate::negation(const EventPredicate& e) { return EventNode::make({EventNode::Not{e}}); }

std::optional<bool> EventPredicate::known_by(const PathView& path, std::size_t limit) const {
  return std::visit(
      overloaded{
          [](const EventNode::Whole&) -> std::optional<bool> { return true; },
          [](const EventNode::Nowhere&) -> std::optional<bool> { return false; },
          [&](const EventNode::ValueAt& v) -> std::optional<bool> {
            auto k = v.rule.stopped_by(path, limit);
            if (!k) return std::nullopt;
            const double x = path[*k];
            switch (v.cmp) {
              case EventNode::Compare::below:
                return x < v.level;
              case EventNode::Compare::above:
                return x > v.level;
              case EventNode::Compare::equal:
                return x == v.level;
            }
            return std::nullopt;
          },
          [&](const EventNode::Later& l) -> std::optional<bool> {
            auto first = l.first.stopped_by(path, limit);
            if (!first) return std::nullopt;
            // Known at the first time: the later rule either fired by then or not.
            auto later = l.later.stopped_by(path, *first);
            return !later.has_value();
          },
          [&](const EventNode::AllOf& a) -> std::optional<bool> {
            bool undetermined = false;
            for (const auto& p : a.parts) {
              auto v = p.known_by(path, limit);
              if (!v) {
                undetermined = true;
              } else if (!*v) {
                return false;
              }
            }
            if (undetermined) return std::nullopt;
            return true;
          },
          [&](const EventNode::AnyOf& a) -> std::optional<bool> {
            bool undetermined = false;
            for (const auto& p : a.parts) {
              auto v = p.known_by(path, limit);
              if (!v) {
                undetermined = true;
              } else if (*v) {
                return true;
              }
            }
            if (undetermined) return std::nullopt;
            return false;
          },
          [&](const EventNode::Not& n) -> std::optional<bool> {
            auto v = n.inner.known_by(path, limit);
            if (!v) return std::nullopt;
            return !*v;
          },
      },
      node_->kind);
}

bool EventPredicate::evaluate(const PathView& path) const {
  auto v = known_by(path, path.size() - 1);
  if (!v) throw DomainError("event not determined within the grid: " + describe());
  return *v;
}

std::size_t EventPredicate::determined_at(const PathView& path) const {
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (known_by(path, k)) return k;
  }
  throw DomainError("event not determined within the grid: " + describe());
}

EventPredicate EventPredicate::map_levels(const std::function<double(double)>& level,
                                          const std::function<double(double)>& drop) const {
  return std::visit(overloaded{
                        [&](const EventNode::Whole&) { return *this; },
                        [&](const EventNode::Nowhere&) { return *this; },
                        [&](const EventNode::ValueAt& v) {
                          return EventNode::make(
                              {EventNode::ValueAt{v.rule.map_levels(level, drop), level(v.level), v.cmp}});
                        },
                        [&](const EventNode::Later& l) {
                          return EventNode::make(
                              {EventNode::Later{l.first.map_levels(level, drop), l.later.map_levels(level, drop)}});
                        },
                        [&](const EventNode::AllOf& a) {
                          std::vector<EventPredicate> parts;
                          for (const auto& p : a.parts) parts.push_back(p.map_levels(level, drop));
                          return EventNode::make({EventNode::AllOf{std::move(parts)}});
                        },
                        [&](const EventNode::AnyOf& a) {
                          std::vector<EventPredicate> parts;
                          for (const auto& p : a.parts) parts.push_back(p.map_levels(level, drop));
                          return EventNode::make({EventNode::AnyOf{std::move(parts)}});
                        },
                        [&](const EventNode::Not& n) {
                          return EventNode::make({EventNode::Not{n.inner.map_levels(level, drop)}});
                        },
                    },
                    node_->kind);
}

std::string EventPredicate::describe() const {
  std::ostringstream os;
  auto join = [&](const std::vector<EventPredicate>& parts) {
    for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? ", " : "") << parts[i].describe();
  };
  std::visit(overloaded{
                 [&](const EventNode::Whole&) { os << "whole_space"; },
                 [&](const EventNode::Nowhere&) { os << "nowhere"; },
                 [&](const EventNode::ValueAt& v) {
                   const char* name = v.cmp == EventNode::Compare::below   ? "value_below_at("
                                      : v.cmp == EventNode::Compare::above ? "value_above_at("
                                                                           : "value_equals_at(";
                   os << name << v.rule.describe() << ", " << fmt_num(v.level) << ")";
                 },
                 [&](const EventNode::Later& l) {
                   os << "strictly_later(" << l.first.describe() << ", " << l.later.describe() << ")";
                 },
                 [&](const EventNode::AllOf& a) {
                   os << "all_of(";
                   join(a.parts);
                   os << ")";
                 },
                 [&](const EventNode::AnyOf& a) {
                   os << "any_of(";
                   join(a.parts);
                   os << ")";
                 },
                 [&](const EventNode::Not& n) { os << "not(" << n.inner.describe() << ")"; },
             },
             node_->kind);
  return os.str();
}

EventPredicate operator&&(const EventPredicate& a, const EventPredicate& b) { return EventPredicate::all_of({a, b}); }
EventPredicate operator||(const EventPredicate& a, const EventPredicate& b) { return EventPredicate::any_of({a, b}); }
EventPredicate operator!(const EventPredicate& a) { return EventPredicate::negation(a); }

std::vector<std::size_t> resolve_all(const StoppingRule& rule, const PathEnsemble& ensemble) {
  std::vector<std::size_t> out(ensemble.n_paths());
  for (std::size_t i = 0; i < ensemble.n_paths(); ++i) out[i] = rule.resolve(ensemble.path(i));
  return out;
}

}  // namespace localmart
