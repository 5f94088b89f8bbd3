#include "localmart/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "localmart/errors.hpp"

namespace localmart {

PathEnsemble::PathEnsemble(TimeGrid grid, std::size_t n_paths, std::vector<double> values,
                           std::vector<double> weights, EnsembleKind kind, SeedInfo seed)
    : grid_(std::move(grid)),
      n_paths_(n_paths),
      values_(std::move(values)),
      weights_(std::move(weights)),
      kind_(kind),
      seed_(seed) {
  if (n_paths_ == 0) throw ParameterError("ensemble needs at least one path");
  if (values_.size() != n_paths_ * grid_.size()) throw ParameterError("ensemble value matrix has wrong size");
  if (weights_.size() != n_paths_) throw ParameterError("ensemble needs one weight per path");
  // Compensated sum: a plain running sum of 10^6 weights drifts by ~1e-10.
  double total = 0.0;
  double carry = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw ParameterError("ensemble weights must be non-negative");
    const double t = total + w;
    carry += std::abs(total) >= w ? (total - t) + w : (w - t) + total;
    total = t;
  }
  total += carry;
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "ensemble weights sum to " << total << ", expected 1";
    throw ParameterError(os.str());
  }
}

PathEnsemble PathEnsemble::monte_carlo(TimeGrid grid, std::size_t n_paths, std::vector<double> values,
                                       SeedInfo seed) {
  std::vector<double> weights(n_paths, 1.0 / static_cast<double>(n_paths));
  return PathEnsemble(std::move(grid), n_paths, std::move(values), std::move(weights), EnsembleKind::monte_carlo,
                      seed);
}

PathEnsemble PathEnsemble::exact(TimeGrid grid, const std::vector<std::vector<double>>& rows,
                                 std::vector<double> weights) {
  std::vector<double> values;
  values.reserve(rows.size() * grid.size());
  for (const auto& r : rows) {
    if (r.size() != grid.size()) throw ParameterError("path length does not match grid");
    values.insert(values.end(), r.begin(), r.end());
  }
  const std::size_t n = rows.size();
  return PathEnsemble(std::move(grid), n, std::move(values), std::move(weights), EnsembleKind::exact);
}

PathEnsemble PathEnsemble::exact(TimeGrid grid, const std::vector<std::vector<double>>& rows) {
  std::vector<double> weights(rows.size(), rows.empty() ? 0.0 : 1.0 / static_cast<double>(rows.size()));
  return exact(std::move(grid), rows, std::move(weights));
}

double PathEnsemble::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

double PathEnsemble::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

double PathEnsemble::max_step() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_paths_; ++i) {
    auto r = row(i);
    for (std::size_t k = 1; k < r.size(); ++k) m = std::max(m, std::abs(r[k] - r[k - 1]));
  }
  return m;
}

PathEnsemble PathEnsemble::with_metadata(const std::string& key, const std::string& value) const& {
  PathEnsemble copy = *this;
  copy.metadata_[key] = value;
  return copy;
}

PathEnsemble PathEnsemble::with_metadata(const std::string& key, const std::string& value) && {
  metadata_[key] = value;
  return std::move(*this);
}

PathEnsemble PathEnsemble::with_values(std::vector<double> values) const {
  PathEnsemble out(grid_, n_paths_, std::move(values), weights_, kind_, seed_);
  out.metadata_ = metadata_;
  return out;
}

bool is_uniform(std::span<const double> weights) {
  for (double w : weights) {
    if (w != weights.front()) return false;
  }
  return true;
}

}  // namespace localmart
