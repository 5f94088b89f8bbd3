#pragma once

#include <cstdint>
#include <random>

namespace localmart {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of path `index`, a pure function of (master seed, scenario, index).
constexpr std::uint64_t path_seed(std::uint64_t master, std::uint64_t scenario, std::uint64_t index) noexcept {
  return mix64(mix64(mix64(master) ^ scenario) + index);
}

/// Per-path random stream. Two streams built from the same seed produce the
/// same draws in the same order, so simulators that share a driver agree
/// path by path.
class PathRng {
 public:
  explicit PathRng(std::uint64_t seed) : engine_(seed) {}
  PathRng(std::uint64_t master, std::uint64_t scenario, std::uint64_t index)
      : engine_(path_seed(master, scenario, index)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace localmart
