#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "localmart/errors.hpp"
#include "localmart/process.hpp"
#include "support/oracles.hpp"

using namespace localmart;

namespace {

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments terminal_moments(const PathEnsemble& e, double (*f)(double) = nullptr) {
  const std::size_t k = e.n_times() - 1;
  double s = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < e.n_paths(); ++i) {
    const double v = f ? f(e.value(i, k)) : e.value(i, k);
    s += v;
    ss += v * v;
  }
  const double n = static_cast<double>(e.n_paths());
  const double m = s / n;
  return {m, std::sqrt((ss / n - m * m) / (n - 1))};
}

double square(double x) { return x * x; }
double log_of(double x) { return std::log(x); }

}  // namespace

TEST(Process, SameSeedSamePaths) {
  const TimeGrid g = TimeGrid::uniform(1.0, 8);
  const auto a = simulate_ensemble(Cev{1.0, 0.0, 1.0, 1.5}, g, 200, 7, {0, 0, 4});
  const auto b = simulate_ensemble(Cev{1.0, 0.0, 1.0, 1.5}, g, 200, 7, {0, 0, 4});
  ASSERT_EQ(a.values().size(), b.values().size());
  for (std::size_t i = 0; i < a.values().size(); ++i) EXPECT_EQ(a.values()[i], b.values()[i]);
  const auto c = simulate_ensemble(Cev{1.0, 0.0, 1.0, 1.5}, g, 200, 8, {0, 0, 4});
  EXPECT_NE(a.value(0, 8), c.value(0, 8));
}

TEST(Process, ChunkedRunMatchesSingleRun) {
  const TimeGrid g = TimeGrid::uniform(1.0, 4);
  const auto whole = simulate_ensemble(BrownianMotion{}, g, 100, 3);
  const auto tail = simulate_ensemble(BrownianMotion{}, g, 40, 3, {0, 60, 1});
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(tail.value(i, k), whole.value(60 + i, k));
  }
}

TEST(Process, WorkerCountDoesNotChangePaths) {
  const TimeGrid g = TimeGrid::uniform(1.0, 16);
  ::setenv("LOCALMART_THREADS", "1", 1);
  const auto a = simulate_ensemble(Bessel{1.0, 3.5}, g, 300, 11);
  ::setenv("LOCALMART_THREADS", "5", 1);
  const auto b = simulate_ensemble(Bessel{1.0, 3.5}, g, 300, 11);
  ::unsetenv("LOCALMART_THREADS");
  for (std::size_t i = 0; i < a.values().size(); ++i) ASSERT_EQ(a.values()[i], b.values()[i]);
}

TEST(Process, InverseBesselIsReciprocalOfSharedBessel) {
  const TimeGrid g = TimeGrid::uniform(1.0, 16);
  const auto inv = simulate_ensemble(InverseBessel3{2.0}, g, 200, 5);
  const auto bes = simulate_ensemble(Bessel{0.5, 3.0}, g, 200, 5);
  for (std::size_t i = 0; i < 200; ++i) {
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(inv.value(i, k) * bes.value(i, k), 1.0, 1e-12);
  }
}

TEST(Process, BesselIsNormOfCoordinates) {
  const TimeGrid g = TimeGrid::uniform(2.0, 10);
  const auto bes = simulate_ensemble(Bessel{1.5, 3.0}, g, 50, 9);
  const auto coords = simulate_brownian_coordinates(3, 1.5, g, 50, 9);
  ASSERT_EQ(coords.size(), 3u);
  for (std::size_t i = 0; i < 50; ++i) {
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double r = std::hypot(coords[0].value(i, k), coords[1].value(i, k), coords[2].value(i, k));
      EXPECT_NEAR(bes.value(i, k), r, 1e-12);
    }
  }
}

TEST(Process, NonnegativeModelsStayNonnegative) {
  const TimeGrid g = TimeGrid::uniform(1.0, 32);
  const ProcessSpec specs[] = {Cev{1.0, 0.0, 1.0, 0.5}, Cev{1.0, 0.0, 2.0, 1.0}, Bessel{0.2, 2.5},
                               InverseBessel3{1.0}, DsExample{}, DriftlessGbm{1.0, 2.0}};
  for (const auto& s : specs) {
    ASSERT_TRUE(is_nonnegative(s)) << describe(s);
    EXPECT_GE(simulate_ensemble(s, g, 500, 21, {0, 0, 4}).min_value(), 0.0) << describe(s);
  }
}

TEST(Process, StartsAtInitialValue) {
  const TimeGrid g = TimeGrid::uniform(1.0, 4);
  EXPECT_EQ(simulate_ensemble(Cev{2.5, 0.0, 1.0, 1.0}, g, 10, 1).value(3, 0), 2.5);
  EXPECT_EQ(simulate_ensemble(AbsBmTransform{2}, g, 10, 1).value(3, 0), 1.0);
  EXPECT_EQ(simulate_ensemble(DsExample{1.0}, g, 10, 1).value(3, 0), 1.0);
}

TEST(Process, DsExampleEndsAtZero) {
  const TimeGrid g = TimeGrid::uniform(1.0, 64);
  const auto e = simulate_ensemble(DsExample{}, g, 1000, 4);
  for (std::size_t i = 0; i < e.n_paths(); ++i) EXPECT_EQ(e.value(i, 64), 0.0);
  EXPECT_THROW(simulate_ensemble(DsExample{}, TimeGrid::uniform(2.0, 4), 10, 1), DomainError);
}

TEST(Process, AbsBmTransformStaysInUnitInterval) {
  const auto e = simulate_ensemble(AbsBmTransform{1}, TimeGrid::uniform(1.0, 16), 500, 2);
  EXPECT_GT(e.min_value(), 0.0);
  EXPECT_LE(e.max_value(), 1.0);
}

TEST(Process, GbmMomentsMatchLognormal) {
  const auto e = simulate_ensemble(DriftlessGbm{1.0, 0.5}, TimeGrid::uniform(1.0, 1), 20000, 13);
  const auto m = terminal_moments(e);
  EXPECT_NEAR(m.mean, 1.0, 4 * m.se);
  const auto lm = terminal_moments(e, log_of);
  EXPECT_NEAR(lm.mean, -0.125, 4 * lm.se);
}

TEST(Process, BrownianVarianceAndQuadraticVariation) {
  const TimeGrid g = TimeGrid::uniform(1.0, 256);
  const auto e = simulate_ensemble(BrownianMotion{0.0, 2.0}, g, 2000, 17);
  const auto m2 = terminal_moments(e, square);
  EXPECT_NEAR(m2.mean, 4.0, 4 * m2.se);
  const auto qv = realized_quadratic_variation(e);
  EXPECT_EQ(qv.value(0, 0), 0.0);
  // Realized variance over 256 steps has relative spread sqrt(2/256).
  EXPECT_NEAR(qv.value(0, 256), 4.0, 4.0 * 4 * std::sqrt(2.0 / 256));
}

TEST(Process, SquaredBesselMeanIsLinear) {
  // E[R_t^2] = x0^2 + delta t for every dimension.
  for (double delta : {3.0, 2.5, 4.0}) {
    const auto e = simulate_ensemble(Bessel{1.0, delta}, TimeGrid::uniform(1.0, 64), 20000, 19);
    const auto m = terminal_moments(e, square);
    EXPECT_NEAR(m.mean, 1.0 + delta, 4 * m.se + 0.02) << delta;
  }
}

TEST(Process, InverseBesselMeanMatchesQuadrature) {
  const double reference = localmart::testing::mean_inverse_norm_3d(1.0, 1.0);
  EXPECT_NEAR(reference, std::erf(1.0 / std::sqrt(2.0)), 1e-7);
  const auto e = simulate_ensemble(InverseBessel3{1.0}, TimeGrid::uniform(1.0, 1), 50000, 23);
  const auto m = terminal_moments(e);
  EXPECT_NEAR(m.mean, reference, 4 * m.se);
}

TEST(Process, CevThreeHalvesLosesMass) {
  // X = 4 / R^2 with R a four-dimensional Bessel process from 2, so
  // E[X_1] = 1 - exp(-2).
  const auto e = simulate_ensemble(Cev{1.0, 0.0, 1.0, 1.5}, TimeGrid::uniform(1.0, 8), 20000, 29, {0, 0, 128});
  const auto m = terminal_moments(e);
  EXPECT_NEAR(m.mean, 1.0 - std::exp(-2.0), 4 * m.se + 0.01);
}

TEST(Process, RejectsBadParameters) {
  const TimeGrid g = TimeGrid::uniform(1.0, 2);
  EXPECT_THROW(simulate_ensemble(Bessel{1.0, 2.0}, g, 1, 1), ParameterError);
  EXPECT_THROW(simulate_ensemble(Cev{-1.0, 0.0, 1.0, 1.0}, g, 1, 1), ParameterError);
  EXPECT_THROW(simulate_ensemble(Cev{1.0, 0.0, 1.0, 0.0}, g, 1, 1), ParameterError);
  EXPECT_THROW(simulate_ensemble(DsExample{1.0, 1.0}, g, 1, 1), ParameterError);
  EXPECT_THROW(simulate_ensemble(AbsBmTransform{-1}, g, 1, 1), ParameterError);
  EXPECT_THROW(simulate_ensemble(BrownianMotion{}, g, 0, 1), ParameterError);
  EXPECT_THROW(simulate_ensemble(BrownianMotion{}, g, 1, 1, {0, 0, 0}), ParameterError);
}

TEST(Process, CatalogListsEveryModel) {
  const auto cat = model_catalog();
  EXPECT_EQ(cat.size(), std::variant_size_v<ProcessSpec>);
  EXPECT_EQ(model_name(InverseBessel3{}), "inverse_bessel3");
}
