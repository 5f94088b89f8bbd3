#include <gtest/gtest.h>

#include <random>

#include "localmart/errors.hpp"
#include "localmart/strategy.hpp"

using namespace localmart;

namespace {

StoppingRule at(double t) { return StoppingRule::deterministic(t); }

SimpleStrategy hold(double t0, double t1, WeightRule w, bool restricted = false) {
  return {{{at(t0), at(t1), std::move(w)}}, restricted};
}

PathEnsemble three_paths() {
  return PathEnsemble::exact(TimeGrid::uniform(2.0, 2), {{1, 2, 2}, {1, 0, 1}, {1, 1, 1}});
}

std::vector<std::vector<double>> random_rows(std::mt19937_64& rng, std::size_t n, std::size_t steps) {
  std::uniform_int_distribution<int> step(-3, 3);
  std::vector<std::vector<double>> rows(n, std::vector<double>(steps + 1, 1.0));
  for (auto& r : rows) {
    for (std::size_t k = 1; k <= steps; ++k) r[k] = r[k - 1] + 0.25 * step(rng);
  }
  return rows;
}

}  // namespace

TEST(Strategy, SingleLegGainIsWeightTimesIncrement) {
  const auto e = three_paths();
  const auto g = strategy_gain(hold(0, 1, WeightRule::constant(2.0)), e);
  EXPECT_EQ(g, (std::vector<double>{2, -2, 0}));
}

TEST(Strategy, LegsAddUp) {
  const auto e = three_paths();
  SimpleStrategy s{{{at(0), at(1), WeightRule::constant(1)},
                    {at(1), at(2), WeightRule::indicator(EventPredicate::value_equals_at(at(1), 0), 2)}}};
  EXPECT_EQ(strategy_gain(s, e), (std::vector<double>{1, 1, 0}));
  const auto legs = resolve_legs(s, e.path(1), e.path(1), 1);
  ASSERT_EQ(legs.size(), 2u);
  EXPECT_EQ(legs[1].entry, 1u);
  EXPECT_EQ(legs[1].weight, 2.0);
}

TEST(Strategy, OverlappingLegsAreRejected) {
  SimpleStrategy s{{{at(0), at(2), WeightRule::constant(1)}, {at(1), at(2), WeightRule::constant(1)}}};
  EXPECT_THROW(strategy_gain(s, three_paths()), StructuralError);
}

TEST(Strategy, WeightMustBeKnownAtEntry) {
  const auto s = hold(0, 1, WeightRule::indicator(EventPredicate::value_above_at(at(1), 0), 1));
  EXPECT_THROW(strategy_gain(s, three_paths()), ConstraintViolation);
}

TEST(Strategy, ShortsaleRestrictionRejectsNegativeWeights) {
  const auto s = hold(0, 1, WeightRule::constant(-1), true);
  EXPECT_THROW(arbitrage_verdict(s, three_paths(), Tolerances::exact()), ConstraintViolation);
}

TEST(Strategy, PartialSumNegativeLooksAtClosedLegs) {
  const auto e = three_paths();
  const Leg first{at(0), at(1), WeightRule::constant(1)};
  SimpleStrategy s{{first, {at(1), at(2), WeightRule::partial_sum_negative({first}, 1)}}};
  EXPECT_EQ(strategy_gain(s, e), (std::vector<double>{1, 0, 0}));
}

TEST(Strategy, VerdictsFollowTheGainSigns) {
  const std::vector<double> w{0.25, 0.25, 0.5};
  EXPECT_EQ(summarize_gains(std::vector<double>{0, 1, 0}, w, Tolerances::exact()).verdict,
            ArbitrageVerdict::arbitrage);
  EXPECT_EQ(summarize_gains(std::vector<double>{0, 1, -1e-3}, w, Tolerances::exact()).verdict,
            ArbitrageVerdict::no_arbitrage_evidence);
  EXPECT_EQ(summarize_gains(std::vector<double>{0, 0, 0}, w, Tolerances::exact()).verdict,
            ArbitrageVerdict::no_arbitrage_evidence);
  EXPECT_EQ(summarize_gains(std::vector<double>{0, 1, 0}, w, Tolerances{0.0, 2}).verdict,
            ArbitrageVerdict::inconclusive);
  const auto r = summarize_gains(std::vector<double>{-1, 1, 0}, w, Tolerances::exact());
  EXPECT_DOUBLE_EQ(r.frac_negative, 0.25);
  EXPECT_DOUBLE_EQ(r.mean_gain, 0.0);
  EXPECT_EQ(r.n_positive, 1u);
}

TEST(Strategy, ZeroWeightPathsDoNotCount) {
  EXPECT_TRUE(is_strictly_positive_class(std::vector<double>{-5, 1}, std::vector<double>{0, 1}, 0));
  EXPECT_FALSE(is_strictly_positive_class(std::vector<double>{0, 0}, std::vector<double>{0.5, 0.5}, 0));
  EXPECT_FALSE(is_strictly_positive_class(std::vector<double>{-1e-6, 1}, std::vector<double>{0.5, 0.5}, 0));
  EXPECT_TRUE(is_strictly_positive_class(std::vector<double>{-1e-12, 1}, std::vector<double>{0.5, 0.5}, 1e-9));
}

TEST(Strategy, MonteCarloToleranceScalesWithPathCount) {
  const auto t = Tolerances::monte_carlo(10000, 2.0);
  EXPECT_EQ(t.min_hits, 10u);
  EXPECT_DOUBLE_EQ(t.tol_zero, 2e-9);
  EXPECT_EQ(Tolerances::monte_carlo(10, 1.0).min_hits, 1u);
}

TEST(Strategy, SearchFindsTheShortSide) {
  const auto e = PathEnsemble::exact(TimeGrid::uniform(1.0, 1), {{1, 0}, {1, 0.5}});
  const std::vector<LegCandidate> family{{at(0), at(1), EventPredicate::whole_space()}};
  const auto free = search_single_leg(e, family, false, Tolerances::exact());
  EXPECT_EQ(free.verdict, ArbitrageVerdict::arbitrage);
  EXPECT_EQ(free.best_sign, -1.0);
  EXPECT_EQ(free.candidates.size(), 2u);
  const auto restricted = search_single_leg(e, family, true, Tolerances::exact());
  EXPECT_EQ(restricted.verdict, ArbitrageVerdict::no_arbitrage_evidence);
  EXPECT_EQ(restricted.candidates.size(), 1u);
}

TEST(Strategy, SignalsAndPricesCanDiffer) {
  const auto sig = three_paths();
  std::vector<double> doubled(sig.values().begin(), sig.values().end());
  for (double& v : doubled) v *= 2;
  const auto prices = sig.with_values(doubled);
  const auto s = hold(0, 1, WeightRule::indicator(EventPredicate::value_above_at(at(0), 0.5), 1));
  EXPECT_EQ(strategy_gain(s, sig, prices), (std::vector<double>{2, -2, 0}));
}

TEST(StrategyProperty, GainIsLinearInTheStrategy) {
  std::mt19937_64 rng(7);
  const TimeGrid g = TimeGrid::uniform(1.0, 4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto e = PathEnsemble::exact(g, random_rows(rng, 20, 4));
    const double level = 0.25 * std::uniform_int_distribution<int>(0, 8)(rng);
    const double c = std::uniform_int_distribution<int>(-3, 3)(rng);
    const auto first = StoppingRule::hit_above(level, 0.5);
    SimpleStrategy a{{{at(0), first, WeightRule::constant(c)}}};
    SimpleStrategy b{{{first, StoppingRule::hit_below(level - 0.5, 1.0, first),
                       WeightRule::indicator(EventPredicate::value_above_at(first, level - 0.25), 1)}}};
    const auto ga = strategy_gain(a, e), gb = strategy_gain(b, e);
    const auto gab = strategy_gain(concatenate(a, b), e);
    const auto gneg = strategy_gain(negate(a), e);
    for (std::size_t i = 0; i < ga.size(); ++i) {
      ASSERT_EQ(gab[i], ga[i] + gb[i]);
      ASSERT_EQ(gneg[i], -ga[i]);
    }
  }
}

TEST(StrategyProperty, VerdictAgreesWithPositiveClass) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> v(-2, 4);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> gains(6), w(6, 1.0 / 6);
    for (double& x : gains) x = v(rng);
    const bool arb = summarize_gains(gains, w, Tolerances::exact()).verdict == ArbitrageVerdict::arbitrage;
    ASSERT_EQ(arb, is_strictly_positive_class(gains, w, 0.0));
  }
}
