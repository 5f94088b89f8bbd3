#include <gtest/gtest.h>

#include <random>

#include "localmart/errors.hpp"
#include "localmart/stopping.hpp"

using namespace localmart;

namespace {

const TimeGrid kGrid = TimeGrid::uniform(1.0, 4);

PathView view(const std::vector<double>& v) { return {v, &kGrid}; }

// Random rules and events over kGrid, built from every constructor.
class RuleGenerator {
 public:
  explicit RuleGenerator(std::uint64_t seed) : rng_(seed) {}

  StoppingRule rule(int depth = 2) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 6 : 2);
    const double cap = time();
    switch (pick(rng_)) {
      case 0:
        return StoppingRule::deterministic(time());
      case 1:
        return StoppingRule::hit_above(level(), cap);
      case 2:
        return StoppingRule::hit_below(level(), cap);
      case 3:
        return StoppingRule::hit_above(level(), 1.0, rule(depth - 1), coin());
      case 4:
        return StoppingRule::first_drop(rule(depth - 1), 0.25 * unit(), 1.0);
      case 5: {
        const auto base = rule(depth - 1);
        return StoppingRule::restricted(base, event(base, depth - 1), 1.0);
      }
      default:
        return StoppingRule::earliest(rule(depth - 1), rule(depth - 1));
    }
  }

  // An event known at `at`.
  EventPredicate event(const StoppingRule& at, int depth) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 5 : 2);
    switch (pick(rng_)) {
      case 0:
        return EventPredicate::value_below_at(at, level());
      case 1:
        return EventPredicate::value_above_at(at, level());
      case 2:
        return EventPredicate::whole_space();
      case 3:
        return EventPredicate::strictly_later(at, StoppingRule::earliest(at, rule(depth - 1)));
      case 4:
        return event(at, depth - 1) && event(at, depth - 1);
      default:
        return !event(at, depth - 1) || event(at, depth - 1);
    }
  }

  std::vector<double> path() {
    std::vector<double> v(kGrid.size());
    v[0] = 1.0;
    std::uniform_int_distribution<int> step(-2, 2);
    for (std::size_t k = 1; k < v.size(); ++k) v[k] = v[k - 1] + 0.25 * step(rng_);
    return v;
  }

  // Same prefix [0, keep], fresh values afterwards.
  std::vector<double> perturb_after(std::vector<double> v, std::size_t keep) {
    std::uniform_int_distribution<int> step(-4, 4);
    for (std::size_t k = keep + 1; k < v.size(); ++k) v[k] = 0.25 * step(rng_);
    return v;
  }

 private:
  double time() { return 0.25 * std::uniform_int_distribution<int>(0, 4)(rng_); }
  double level() { return 0.25 * std::uniform_int_distribution<int>(0, 8)(rng_); }
  double unit() { return std::uniform_int_distribution<int>(0, 4)(rng_); }
  bool coin() { return std::uniform_int_distribution<int>(0, 1)(rng_) == 1; }

  std::mt19937_64 rng_;
};

}  // namespace

TEST(Stopping, DeterministicResolvesToGridIndex) {
  const std::vector<double> p{1, 2, 3, 4, 5};
  EXPECT_EQ(StoppingRule::deterministic(0.5).resolve(view(p)), 2u);
  EXPECT_EQ(StoppingRule::deterministic(0.0).resolve(view(p)), 0u);
  EXPECT_THROW(StoppingRule::deterministic(2.0).resolve(view(p)), DomainError);
}

TEST(Stopping, HitRulesAreInclusiveUnlessStrict) {
  const std::vector<double> p{1, 1.5, 2, 1, 3};
  EXPECT_EQ(StoppingRule::hit_above(2.0, 1.0).resolve(view(p)), 2u);
  EXPECT_EQ(StoppingRule::hit_above(2.0, 1.0, StoppingRule::deterministic(0), true).resolve(view(p)), 4u);
  EXPECT_EQ(StoppingRule::hit_above(5.0, 0.75).resolve(view(p)), 3u);
  EXPECT_EQ(StoppingRule::hit_below(1.0, 1.0).resolve(view(p)), 0u);
  EXPECT_EQ(StoppingRule::hit_below(1.0, 1.0, StoppingRule::deterministic(0.25)).resolve(view(p)), 3u);
}

TEST(Stopping, FirstDropUsesStrictInequality) {
  const std::vector<double> p{1, 2, 1.5, 1.25, 0};
  const auto base = StoppingRule::deterministic(0.25);
  EXPECT_EQ(StoppingRule::first_drop(base, 0.5, 1.0).resolve(view(p)), 3u);
  EXPECT_EQ(StoppingRule::first_drop(base, 0.75, 1.0).resolve(view(p)), 4u);
  EXPECT_EQ(StoppingRule::first_drop(base, 5.0, 0.75).resolve(view(p)), 3u);
}

TEST(Stopping, RestrictedFallsBackOffTheEvent) {
  const auto base = StoppingRule::deterministic(0.25);
  const auto r = StoppingRule::restricted(base, EventPredicate::value_above_at(base, 1.5), 1.0);
  EXPECT_EQ(r.resolve(view({1, 2, 0, 0, 0})), 1u);
  EXPECT_EQ(r.resolve(view({1, 1, 0, 0, 0})), 4u);
}

TEST(Stopping, EarliestTakesMinimum) {
  const auto r = StoppingRule::earliest(StoppingRule::hit_above(2.0, 1.0), StoppingRule::deterministic(0.5));
  EXPECT_EQ(r.resolve(view({1, 3, 0, 0, 0})), 1u);
  EXPECT_EQ(r.resolve(view({1, 1, 1, 3, 0})), 2u);
}

TEST(Stopping, EventsCombine) {
  const auto t = StoppingRule::deterministic(0.5);
  const auto a = EventPredicate::value_below_at(t, 2.0);
  const auto b = EventPredicate::value_equals_at(t, 1.0);
  const std::vector<double> p{1, 0, 1, 5, 5};
  EXPECT_TRUE(a.evaluate(view(p)));
  EXPECT_TRUE((a && b).evaluate(view(p)));
  EXPECT_FALSE((!a).evaluate(view(p)));
  EXPECT_TRUE(EventPredicate::any_of({!a, b}).evaluate(view(p)));
  EXPECT_FALSE(EventPredicate::nowhere().evaluate(view(p)));
  EXPECT_TRUE(EventPredicate::whole_space().evaluate(view(p)));
  EXPECT_EQ(a.determined_at(view(p)), 2u);
}

TEST(Stopping, StrictlyLaterIsKnownAtTheFirstTime) {
  const auto first = StoppingRule::hit_above(2.0, 1.0);
  const auto e = EventPredicate::strictly_later(first, StoppingRule::deterministic(0.5));
  EXPECT_TRUE(e.evaluate(view({1, 2, 0, 0, 0})));
  EXPECT_EQ(e.known_by(view({1, 2, 0, 0, 0}), 1), std::optional<bool>(true));
  EXPECT_FALSE(e.evaluate(view({1, 1, 1, 2, 0})));
}

TEST(Stopping, DescribeRoundTripsLevelsAndCaps) {
  const auto r = StoppingRule::hit_above(1.5, 0.75);
  EXPECT_NE(r.describe().find("1.5"), std::string::npos);
  EXPECT_DOUBLE_EQ(r.cap(), 0.75);
}

TEST(Stopping, MapLevelsMovesThresholds) {
  const auto r = StoppingRule::hit_above(1.0, 1.0).map_levels([](double x) { return 2 * x + 1; },
                                                               [](double e) { return e; });
  EXPECT_EQ(r.resolve(view({1, 2, 3, 0, 0})), 2u);
}

TEST(StoppingProperty, RulesOnlyReadTheirPast) {
  RuleGenerator gen(101);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto r = gen.rule();
    const auto p = gen.path();
    const std::size_t k = r.resolve(view(p));
    ASSERT_LE(k, kGrid.index_of(r.cap())) << r.describe();
    ASSERT_EQ(r.stopped_by(view(p), k), std::optional<std::size_t>(k)) << r.describe();
    if (k > 0) {
      ASSERT_FALSE(r.stopped_by(view(p), k - 1).has_value()) << r.describe();
    }
    const auto q = gen.perturb_after(p, k);
    ASSERT_EQ(r.resolve(view(q)), k) << r.describe();
  }
}

TEST(StoppingProperty, EventsAreKnownAtTheirRule) {
  RuleGenerator gen(202);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto r = gen.rule();
    const auto e = gen.event(r, 2);
    const auto p = gen.path();
    const std::size_t k = r.resolve(view(p));
    const auto known = e.known_by(view(p), k);
    ASSERT_TRUE(known.has_value()) << e.describe();
    ASSERT_EQ(*known, e.evaluate(view(p))) << e.describe();
    ASSERT_LE(e.determined_at(view(p)), k);
    const auto q = gen.perturb_after(p, k);
    ASSERT_EQ(e.evaluate(view(q)), *known) << e.describe();
  }
}

TEST(StoppingProperty, ResolveAllMatchesPerPath) {
  RuleGenerator gen(303);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 50; ++i) rows.push_back(gen.path());
  const auto ens = PathEnsemble::exact(kGrid, rows);
  const auto r = gen.rule();
  const auto all = resolve_all(r, ens);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(all[i], r.resolve(ens.path(i)));
}
