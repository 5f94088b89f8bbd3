#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace localmart {

/// Strictly increasing observation times starting at 0.
///
/// The last point is the horizon. Stopping rules and probes address the grid
/// through `index_at_or_before`, which tolerates round-off of a few ulps so a
/// cap written as `0.3` resolves to the grid point built as `3 * 0.1`.
class TimeGrid {
 public:
  explicit TimeGrid(std::vector<double> points);

  static TimeGrid uniform(double horizon, std::size_t steps);

  std::size_t size() const noexcept { return points_.size(); }
  double horizon() const noexcept { return points_.back(); }
  double operator[](std::size_t i) const { return points_[i]; }
  std::span<const double> points() const noexcept { return points_; }

  /// Largest index whose time is <= t. Throws DomainError when t exceeds the
  /// horizon or is negative.
  std::size_t index_at_or_before(double t) const;

  /// Index of a time that must be a grid point; throws DomainError otherwise.
  std::size_t index_of(double t) const;

  double tolerance() const noexcept;

  bool operator==(const TimeGrid& other) const = default;

 private:
  std::vector<double> points_;
};

}  // namespace localmart
