#include "localmart/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "localmart/errors.hpp"

namespace localmart {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw ParameterError("time grid needs at least two points");
  if (points_.front() != 0.0) throw ParameterError("time grid must start at 0");
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (!(points_[i] > points_[i - 1]) || !std::isfinite(points_[i])) {
      std::ostringstream os;
      os << "time grid not strictly increasing at index " << i;
      throw ParameterError(os.str());
    }
  }
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
  if (steps == 0) throw ParameterError("uniform grid needs at least one step");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ParameterError("grid horizon must be positive");
  std::vector<double> pts(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) pts[i] = horizon * static_cast<double>(i) / static_cast<double>(steps);
  pts.back() = horizon;
  return TimeGrid(std::move(pts));
}

double TimeGrid::tolerance() const noexcept { return 1e-12 * std::max(1.0, horizon()); }

std::size_t TimeGrid::index_at_or_before(double t) const {
  const double tol = tolerance();
  if (!(t >= -tol) || t > horizon() + tol) {
    std::ostringstream os;
    os << "time " << t << " outside grid [0, " << horizon() << "]";
    throw DomainError(os.str());
  }
  auto it = std::upper_bound(points_.begin(), points_.end(), t + tol);
  return static_cast<std::size_t>(std::distance(points_.begin(), it)) - 1;
}

std::size_t TimeGrid::index_of(double t) const {
  const std::size_t i = index_at_or_before(t);
  if (std::abs(points_[i] - t) > tolerance()) {
    std::ostringstream os;
    os << "time " << t << " is not a grid point";
    throw DomainError(os.str());
  }
  return i;
}

}  // namespace localmart
