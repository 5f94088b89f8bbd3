#include <gtest/gtest.h>

#include "localmart/errors.hpp"
#include "localmart/lattice.hpp"
#include "support/random_lattice.hpp"

using namespace localmart;

namespace {

Lattice tree(const std::string& text) { return build_lattice(parse_lattice_spec(text)); }

// Ordered pairs tau0 <= tau1 by direct comparison of the enumerated times.
double brute_pair_count(const Lattice& l) {
  const auto all = enumerate_stopping_times(l);
  double n = 0;
  for (const auto& a : all) {
    for (const auto& b : all) {
      bool le = true;
      for (std::size_t p = 0; p < a.size(); ++p) le = le && a[p] <= b[p];
      n += le;
    }
  }
  return n;
}

}  // namespace

TEST(LatticeSpec, ParseAndDescribeRoundTrip) {
  const std::string text = "1 {0.5: 2, 0.5: 0.5 {1: 0.5}}";
  const auto spec = parse_lattice_spec(text);
  EXPECT_EQ(spec.value, 1.0);
  ASSERT_EQ(spec.branches.size(), 2u);
  EXPECT_EQ(spec.branches[1].second.branches.size(), 1u);
  EXPECT_EQ(spec.describe(), text);
  EXPECT_EQ(parse_lattice_spec(spec.describe()).describe(), text);
}

TEST(LatticeSpec, MalformedInputReportsAnOffset) {
  try {
    parse_lattice_spec("1 {0.5 2}");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_lattice_spec("1 {0.5: 2,"), ValidationError);
  EXPECT_THROW(parse_lattice_spec(""), ValidationError);
}

TEST(Lattice, ValidatesTheTree) {
  EXPECT_THROW(tree("1"), ValidationError);
  EXPECT_THROW(tree("1 {0.5: 2, 0.4: 0}"), ValidationError);
  EXPECT_THROW(tree("1 {0.5: 2, 0.5: 2}"), ValidationError);
  EXPECT_THROW(tree("1 {1.5: 2, -0.5: 0}"), ValidationError);
  EXPECT_NO_THROW(tree("1 {1: 1}"));
}

TEST(Lattice, PadsUnevenLeaves) {
  const auto l = tree("1 {0.5: 2, 0.5: 0 {0.5: 1, 0.5: -1}}");
  EXPECT_EQ(l.depth(), 2u);
  EXPECT_EQ(l.n_paths(), 3u);
  EXPECT_EQ(l.value_on_path(0, 2), 2.0);
  EXPECT_EQ(l.weights(), (std::vector<double>{0.5, 0.25, 0.25}));
  const auto e = l.to_ensemble();
  EXPECT_TRUE(e.is_exact());
  EXPECT_EQ(e.value(2, 2), -1.0);
}

TEST(Lattice, NodeEventsSelectTheirPaths) {
  const auto l = tree("1 {0.5: 2 {0.5: 3, 0.5: 1}, 0.5: 0 {0.5: 1, 0.5: -1}}");
  const auto e = l.to_ensemble();
  for (std::size_t v = 0; v < l.nodes().size(); ++v) {
    const auto ev = l.node_event(v);
    for (std::size_t p = 0; p < l.n_paths(); ++p) {
      const bool through = l.node_on_path(p, l.nodes()[v].depth) == v;
      EXPECT_EQ(ev.evaluate(e.path(p)), through) << v << " " << p;
    }
  }
}

TEST(Lattice, MappedTreeRejectsMergedSiblings) {
  const auto l = tree("1 {0.5: 2, 0.5: 0}");
  EXPECT_EQ(l.mapped(MonotoneMap(maps::Affine{2, 1})).value_on_path(0, 1), 5.0);
  EXPECT_THROW(l.mapped(MonotoneMap(maps::PiecewiseLinear{{{-1, 0}, {3, 0}}, false})), ValidationError);
}

TEST(Lattice, CountsStoppingTimes) {
  const auto l = tree("0 {0.5: 1 {0.5: 2, 0.5: 0}, 0.5: -1 {0.5: 0, 0.5: -2}}");
  EXPECT_EQ(count_stopping_times(l), 5.0);
  EXPECT_EQ(enumerate_stopping_times(l).size(), 5u);
  EXPECT_EQ(count_stopping_pairs(l), brute_pair_count(l));
}

TEST(Lattice, ExactSumSign) {
  EXPECT_EQ(exact_sum_sign({}), 0);
  EXPECT_EQ(exact_sum_sign({1.0, -1.0}), 0);
  EXPECT_EQ(exact_sum_sign({1e100, 1.0, -1e100}), 1);
  EXPECT_EQ(exact_sum_sign({-1e-300, 1e300, -1e300}), -1);
  // The doubles nearest 0.1 and 0.2 add to slightly more than the one nearest 0.3.
  EXPECT_EQ(exact_sum_sign({0.1, 0.2, -0.3}), 1);
}

TEST(Lattice, BinomialExamples) {
  const auto fair = tree("1 {0.5: 2, 0.5: 0}");
  EXPECT_TRUE(pairwise_characterization(fair).no_arbitrage);
  EXPECT_TRUE(enumerate_no_arbitrage(fair, true).no_arbitrage);
  EXPECT_TRUE(enumerate_no_arbitrage(fair, false).no_arbitrage);

  const auto falling = tree("1 {0.5: 0.5, 0.5: 0}");
  EXPECT_TRUE(pairwise_characterization(falling).no_arbitrage);
  EXPECT_TRUE(enumerate_no_arbitrage(falling, true).no_arbitrage);
  const auto free = enumerate_no_arbitrage(falling, false);
  EXPECT_FALSE(free.no_arbitrage);
  ASSERT_TRUE(free.certificate.has_value());
  EXPECT_EQ(free.certificate->labels[0].second, -1.0);

  const auto rising = tree("1 {0.5: 1.5 {0.5: 2, 0.5: 1.75}, 0.5: 0 {0.5: 0.5, 0.5: -0.5}}");
  const auto pw = pairwise_characterization(rising);
  EXPECT_FALSE(pw.no_arbitrage);
  ASSERT_TRUE(pw.witness.has_value());
  EXPECT_EQ(rising.nodes()[pw.witness->atom].value, 1.5);
  EXPECT_FALSE(enumerate_no_arbitrage(rising, true).no_arbitrage);
}

TEST(Lattice, BudgetsAreEnforced) {
  const auto l = tree("0 {0.5: 1 {0.5: 2, 0.5: 0}, 0.5: -1 {0.5: 0, 0.5: -2}}");
  EXPECT_THROW(pairwise_characterization(l, 3), BudgetExceeded);
  EXPECT_THROW(enumerate_no_arbitrage(l, false, {1.0}, 10), BudgetExceeded);
  EXPECT_EQ(enumerate_no_arbitrage(l, true).strategies_examined, 8.0);
}

TEST(Lattice, FindArbitragesReturnsVerifiedLabelings) {
  const auto l = tree("1 {0.5: 1.5 {0.5: 2, 0.5: 1.75}, 0.5: 0 {0.5: 0.5, 0.5: -0.5}}");
  const auto certs = find_arbitrages(l, true, default_alphabet(true), 10);
  ASSERT_FALSE(certs.empty());
  const auto e = l.to_ensemble();
  for (const auto& c : certs) {
    EXPECT_EQ(strategy_gain(c.strategy, e), c.gains);
    EXPECT_TRUE(is_strictly_positive_class(c.gains, e.weights(), 0.0));
  }
}

TEST(LatticeProperty, PairwiseCharacterizationMatchesEnumeration) {
  localmart::testing::LatticeGenerator gen(2024);
  int arbitrage = 0, fair = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto l = build_lattice(gen.next());
    const auto pw = pairwise_characterization(l);
    const auto en = enumerate_no_arbitrage(l, true);
    ASSERT_EQ(pw.no_arbitrage, en.no_arbitrage) << l.spec().describe();
    if (en.certificate) {
      const auto e = l.to_ensemble();
      ASSERT_EQ(strategy_gain(en.certificate->strategy, e), en.certificate->gains);
      ASSERT_TRUE(is_strictly_positive_class(en.certificate->gains, e.weights(), 0.0));
    }
    (pw.no_arbitrage ? fair : arbitrage)++;
  }
  // Both outcomes must be exercised for the comparison to mean anything.
  EXPECT_GT(fair, 20);
  EXPECT_GT(arbitrage, 20);
}

TEST(LatticeProperty, PairCountMatchesBruteForce) {
  localmart::testing::LatticeGenerator gen(77, 3, 2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto l = build_lattice(gen.next());
    ASSERT_EQ(count_stopping_times(l), static_cast<double>(enumerate_stopping_times(l).size()));
    ASSERT_EQ(count_stopping_pairs(l), brute_pair_count(l));
  }
}
