#pragma once

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "localmart/lattice.hpp"
#include "localmart/transforms.hpp"

namespace localmart::testing {

// Random finite trees with values on the grid k/4. Quarter-integer values keep
// every gain computation exact in double precision, so tol-0 comparisons
// between independent brute forces are meaningful.
class LatticeGenerator {
 public:
  explicit LatticeGenerator(std::uint64_t seed, std::size_t max_depth = 3, std::size_t max_branches = 3)
      : rng_(seed), max_depth_(max_depth), max_branches_(max_branches) {}

  LatticeSpec next() {
    const std::size_t depth = pick(1, max_depth_);
    return node(0.0, 0, depth);
  }

  // Strictly increasing piecewise-linear map with 2-5 random knots.
  MonotoneMap increasing_map() {
    const std::size_t k = pick(2, 5);
    std::uniform_real_distribution<double> gap(0.25, 2.0);
    std::uniform_real_distribution<double> slope(0.1, 5.0);
    maps::PiecewiseLinear m;
    double x = -3.0 + gap(rng_);
    double y = std::uniform_real_distribution<double>(-10.0, 10.0)(rng_);
    for (std::size_t i = 0; i < k; ++i) {
      m.knots.emplace_back(x, y);
      const double dx = gap(rng_);
      x += dx;
      y += slope(rng_) * dx;
    }
    m.strict = true;
    return MonotoneMap(std::move(m));
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::size_t pick(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }

  LatticeSpec node(double value, std::size_t depth, std::size_t target) {
    LatticeSpec s;
    s.value = value;
    if (depth == target) return s;
    // Uneven leaves: below the root a node may stop early.
    if (depth > 0 && std::bernoulli_distribution(0.15)(rng_)) return s;
    const std::size_t n = pick(1, max_branches_);
    std::vector<int> steps;
    std::vector<double> weights;
    if (n >= 2 && std::bernoulli_distribution(0.4)(rng_)) {
      // Zero-drift node: symmetric moves with equal weights (plus a zero move
      // when the branch count is odd).
      const int a = static_cast<int>(pick(1, 4));
      steps = {-a, a};
      if (n == 3) steps.push_back(0);
      weights.assign(steps.size(), 1.0);
    } else {
      std::vector<int> pool(9);
      std::iota(pool.begin(), pool.end(), -4);
      std::shuffle(pool.begin(), pool.end(), rng_);
      steps.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
      for (std::size_t i = 0; i < n; ++i) weights.push_back(static_cast<double>(pick(1, 4)));
    }
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (std::size_t i = 0; i < steps.size(); ++i) {
      s.branches.emplace_back(weights[i] / total, node(value + 0.25 * steps[i], depth + 1, target));
    }
    return s;
  }

  std::mt19937_64 rng_;
  std::size_t max_depth_;
  std::size_t max_branches_;
};

}  // namespace localmart::testing
