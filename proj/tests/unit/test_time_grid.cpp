#include <gtest/gtest.h>

#include <cstdlib>
#include <numeric>

#include "localmart/ensemble.hpp"
#include "localmart/errors.hpp"
#include "localmart/format.hpp"
#include "localmart/parallel.hpp"
#include "localmart/rng.hpp"
#include "localmart/time_grid.hpp"

using namespace localmart;

TEST(TimeGrid, UniformGridHasExpectedPoints) {
  const TimeGrid g = TimeGrid::uniform(1.0, 4);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g[0], 0.0);
  EXPECT_DOUBLE_EQ(g[2], 0.5);
  EXPECT_DOUBLE_EQ(g.horizon(), 1.0);
}

TEST(TimeGrid, RejectsBadPoints) {
  EXPECT_THROW(TimeGrid({0.0}), ParameterError);
  EXPECT_THROW(TimeGrid({0.1, 0.5}), ParameterError);
  EXPECT_THROW(TimeGrid({0.0, 0.5, 0.5}), ParameterError);
}

TEST(TimeGrid, IndexLookup) {
  const TimeGrid g({0.0, 0.3, 0.7, 1.0});
  EXPECT_EQ(g.index_at_or_before(0.5), 1u);
  EXPECT_EQ(g.index_at_or_before(1.0), 3u);
  EXPECT_EQ(g.index_of(0.7), 2u);
  EXPECT_THROW(g.index_of(0.5), DomainError);
  EXPECT_THROW(g.index_at_or_before(1.5), DomainError);
}

TEST(Ensemble, ValidatesWeights) {
  const TimeGrid g = TimeGrid::uniform(1.0, 1);
  EXPECT_THROW(PathEnsemble::exact(g, {{1, 2}, {1, 0}}, {0.5, 0.6}), ParameterError);
  EXPECT_THROW(PathEnsemble::exact(g, {{1, 2}, {1, 0}}, {1.5, -0.5}), ParameterError);
  const auto e = PathEnsemble::exact(g, {{1, 2}, {1, 0}});
  EXPECT_DOUBLE_EQ(e.weight(1), 0.5);
  EXPECT_TRUE(e.is_exact());
}

TEST(Ensemble, UniformWeightsOfAMillionPathsAreAccepted) {
  const TimeGrid g = TimeGrid::uniform(1.0, 1);
  const std::size_t n = 1000000;
  EXPECT_NO_THROW(PathEnsemble::monte_carlo(g, n, std::vector<double>(2 * n, 1.0), {}));
}

TEST(Rng, PathSeedsAreDistinctAndStable) {
  EXPECT_EQ(path_seed(1, 0, 5), path_seed(1, 0, 5));
  EXPECT_NE(path_seed(1, 0, 5), path_seed(1, 0, 6));
  EXPECT_NE(path_seed(1, 0, 5), path_seed(1, 1, 5));
  EXPECT_NE(path_seed(1, 0, 5), path_seed(2, 0, 5));
}

TEST(Parallel, DeterministicSumIgnoresWorkerCount) {
  auto term = [](std::size_t i) { return 1.0 / (1.0 + static_cast<double>(i)); };
  ::setenv("LOCALMART_THREADS", "1", 1);
  const double a = deterministic_sum(100000, term);
  ::setenv("LOCALMART_THREADS", "7", 1);
  const double b = deterministic_sum(100000, term);
  ::unsetenv("LOCALMART_THREADS");
  EXPECT_EQ(a, b);
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<int> hits(5000, 0);
  parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) ++hits[i];
  });
  EXPECT_EQ(std::accumulate(hits.begin(), hits.end(), 0), 5000);
}

TEST(Format, RoundTripsShortest) {
  EXPECT_EQ(fmt_num(0.5), "0.5");
  EXPECT_EQ(fmt_num(1.0), "1");
  EXPECT_EQ(std::stod(fmt_num(0.1 + 0.2)), 0.1 + 0.2);
  EXPECT_EQ(fmt17(0.1), "0.10000000000000001");
}
