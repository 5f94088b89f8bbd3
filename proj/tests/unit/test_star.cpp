#include <gtest/gtest.h>

#include <random>

#include "localmart/errors.hpp"
#include "localmart/star.hpp"

using namespace localmart;

namespace {

StoppingRule at(double t) { return StoppingRule::deterministic(t); }

PathEnsemble dropping_paths() {
  return PathEnsemble::exact(TimeGrid::uniform(1.0, 2), {{1, 2, 0}, {1, 0.5, 1}, {2, 3, 4}});
}

}  // namespace

TEST(Star, WilsonIntervalMatchesFrozenValues) {
  // Frozen from the closed-form score interval with z = 1.959963984540054.
  auto [lo, hi] = wilson_interval(0.5, 100);
  EXPECT_NEAR(lo, 0.4038315303659956, 1e-14);
  EXPECT_NEAR(hi, 0.5961684696340044, 1e-14);
  std::tie(lo, hi) = wilson_interval(0.0, 10000);
  EXPECT_NEAR(lo, 0.0, 1e-15);
  EXPECT_NEAR(hi, 0.00038399837067659573, 1e-15);
  std::tie(lo, hi) = wilson_interval(0.1, 50);
  EXPECT_NEAR(lo, 0.04347576493189041, 1e-14);
  EXPECT_NEAR(hi, 0.21360231437479654, 1e-14);
}

TEST(Star, CountsPathsThatStayAbove) {
  const auto e = dropping_paths();
  const StarProbe probe{at(0), EventPredicate::value_below_at(at(0), 1.5), 1.0, {0.25, 0.5, 2.0}};
  const auto r = star_probe(e, probe, {1});
  ASSERT_EQ(r.entries.size(), 3u);
  // Only the first two paths are in A; the second drops by exactly 0.5.
  EXPECT_EQ(r.entries[0].n_event, 2u);
  EXPECT_EQ(r.entries[0].n_joint, 0u);
  EXPECT_EQ(r.entries[0].verdict, StarVerdict::violation_suspected);
  EXPECT_EQ(r.entries[1].n_joint, 0u);
  EXPECT_EQ(r.entries[2].n_joint, 2u);
  EXPECT_DOUBLE_EQ(r.entries[2].p_hat, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.entries[2].p_event, 2.0 / 3.0);
  EXPECT_EQ(r.entries[2].verdict, StarVerdict::consistent);
}

TEST(Star, HorizonLimitsTheWindow) {
  const auto e = dropping_paths();
  const StarProbe probe{at(0), EventPredicate::whole_space(), 0.5, {0.75}};
  const auto r = star_probe(e, probe, {1});
  EXPECT_EQ(r.entries[0].n_joint, 3u);
}

TEST(Star, FewPathsInTheEventAreUnderpowered) {
  const StarProbe probe{at(0), EventPredicate::whole_space(), 1.0, {0.1}};
  EXPECT_EQ(star_probe(dropping_paths(), probe).entries[0].verdict, StarVerdict::underpowered);
}

TEST(Star, ScanFlagsAnyViolation) {
  const auto e = dropping_paths();
  const StarProbe good{at(0), EventPredicate::whole_space(), 1.0, {5.0}};
  const StarProbe bad{at(0.5), EventPredicate::value_above_at(at(0.5), 1.5), 1.0, {0.5}};
  EXPECT_EQ(star_scan(e, {good}, {1}).overall, StarVerdict::consistent);
  const auto scan = star_scan(e, {good, bad}, {1});
  EXPECT_EQ(scan.reports.size(), 2u);
  EXPECT_EQ(scan.overall, StarVerdict::consistent);
  const StarProbe drop{at(0.5), EventPredicate::value_equals_at(at(0.5), 2), 1.0, {1.5}};
  EXPECT_EQ(star_scan(e, {good, drop}, {1}).overall, StarVerdict::violation_suspected);
}

TEST(Star, DescribeUsesTheProbeGrammar) {
  const StarProbe probe{at(0), EventPredicate::whole_space(), 1.0, {0.5, 1}};
  const std::string d = probe.describe();
  EXPECT_EQ(std::count(d.begin(), d.end(), '|'), 3);
}

TEST(Star, PricesCanBeTransformedSeparately) {
  const auto sig = dropping_paths();
  std::vector<double> scaled(sig.values().begin(), sig.values().end());
  for (double& v : scaled) v *= 10;
  const StarProbe probe{at(0), EventPredicate::whole_space(), 1.0, {0.75}};
  EXPECT_EQ(star_probe(sig, probe, {1}).entries[0].n_joint, 2u);
  EXPECT_EQ(star_probe(sig, sig.with_values(scaled), probe, {1}).entries[0].n_joint, 1u);
}

TEST(StarProperty, JointCountIsMonotoneInEpsilon) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> step(-2, 2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<double>> rows(30, std::vector<double>(9, 1.0));
    for (auto& r : rows) {
      for (std::size_t k = 1; k < r.size(); ++k) r[k] = r[k - 1] + 0.25 * step(rng);
    }
    const auto e = PathEnsemble::exact(TimeGrid::uniform(1.0, 8), rows);
    const auto tau = StoppingRule::hit_above(1.25, 0.5);
    const StarProbe probe{tau, EventPredicate::value_above_at(tau, 1.0), 1.0, {0.1, 0.3, 0.6, 1.1, 2.0}};
    const auto r = star_probe(e, probe, {1});
    for (std::size_t j = 1; j < r.entries.size(); ++j) {
      ASSERT_GE(r.entries[j].n_joint, r.entries[j - 1].n_joint);
      ASSERT_EQ(r.entries[j].n_event, r.entries[0].n_event);
    }
    for (const auto& en : r.entries) {
      ASSERT_LE(en.n_joint, en.n_event);
      ASSERT_LE(en.ci_low, en.p_hat);
      ASSERT_GE(en.ci_high, en.p_hat);
    }
  }
}
