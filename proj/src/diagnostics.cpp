#include "localmart/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "localmart/errors.hpp"
#include "localmart/parallel.hpp"

namespace localmart {

std::string to_string(DefectClass c) {
  switch (c) {
    case DefectClass::martingale_consistent:
      return "MARTINGALE_CONSISTENT";
    case DefectClass::strict_local_suspected:
      return "STRICT_LOCAL_SUSPECTED";
    case DefectClass::inconclusive:
      return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

namespace {

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
};

// Weighted mean and standard error of the samples d(i).
Moments weighted_moments(const PathEnsemble& ensemble, const std::function<double(std::size_t)>& d) {
  const std::size_t n = ensemble.n_paths();
  const auto& w = ensemble.weights();
  Moments m;
  if (is_uniform(w)) {
    const double nn = static_cast<double>(n);
    m.mean = deterministic_sum(n, d) / nn;
    const double ss = deterministic_sum(n, [&](std::size_t i) {
      const double c = d(i) - m.mean;
      return c * c;
    });
    m.std_error = ensemble.is_exact() || n < 2 ? 0.0 : std::sqrt(ss / (nn - 1.0) / nn);
    return m;
  }
  m.mean = deterministic_sum(n, [&](std::size_t i) { return w[i] * d(i); });
  const double var = deterministic_sum(n, [&](std::size_t i) {
    const double c = d(i) - m.mean;
    return w[i] * c * c;
  });
  const double sum_w2 = deterministic_sum(n, [&](std::size_t i) { return w[i] * w[i]; });
  const double n_eff = 1.0 / sum_w2;
  if (n_eff > 1.0 + 1e-9 && !ensemble.is_exact()) {
    m.std_error = std::sqrt(var * n_eff / (n_eff - 1.0) / n_eff);
  } else {
    m.std_error = 0.0;
  }
  return m;
}

double z_of(double value, double se) {
  if (se > 0.0) return value / se;
  if (value == 0.0) return 0.0;
  return std::copysign(std::numeric_limits<double>::infinity(), value);
}

}  // namespace

DefectTable martingale_defect(const PathEnsemble& ensemble, const std::vector<double>& times,
                              const DefectOptions& options) {
  if (times.empty()) throw ParameterError("martingale_defect needs at least one time");
  DefectTable table;
  table.options = options;
  const auto& grid = ensemble.grid();
  const Moments x0 = weighted_moments(ensemble, [&](std::size_t i) { return ensemble.value(i, 0); });
  for (double t : times) {
    const std::size_t k = grid.index_of(t);
    const Moments inc = weighted_moments(ensemble, [&](std::size_t i) {
      return ensemble.value(i, k) - ensemble.value(i, 0);
    });
    DefectRow row;
    row.t = grid[k];
    row.sample_mean = x0.mean + inc.mean;
    row.std_error = inc.std_error;
    row.defect = 0.0 - inc.mean;
    row.z_score = z_of(row.defect, row.std_error);
    table.rows.push_back(row);
  }

  double max_z = -std::numeric_limits<double>::infinity();
  bool all_small = true;
  for (const auto& r : table.rows) {
    max_z = std::max(max_z, r.z_score);
    if (!(std::abs(r.z_score) < options.consistent_threshold)) all_small = false;
  }
  if (max_z >= options.z_threshold) {
    table.classification = DefectClass::strict_local_suspected;
  } else if (all_small) {
    table.classification = DefectClass::martingale_consistent;
  } else {
    table.classification = DefectClass::inconclusive;
  }
  return table;
}

DefectTable martingale_defect(const PathEnsemble& ensemble, const DefectOptions& options) {
  const auto pts = ensemble.grid().points();
  return martingale_defect(ensemble, std::vector<double>(pts.begin(), pts.end()), options);
}

std::vector<StoppedPairResult> stopped_pair_check(const PathEnsemble& ensemble,
                                                  const std::vector<StoppedPair>& pairs) {
  std::vector<StoppedPairResult> out;
  for (const auto& p : pairs) {
    const auto i0 = resolve_all(p.tau0, ensemble);
    const auto i1 = resolve_all(p.tau1, ensemble);
    const Moments m0 = weighted_moments(ensemble, [&](std::size_t i) { return ensemble.value(i, i0[i]); });
    const Moments m1 = weighted_moments(ensemble, [&](std::size_t i) { return ensemble.value(i, i1[i]); });
    const Moments diff = weighted_moments(ensemble, [&](std::size_t i) {
      return ensemble.value(i, i0[i]) - ensemble.value(i, i1[i]);
    });
    StoppedPairResult r;
    r.tau0 = p.tau0.describe();
    r.tau1 = p.tau1.describe();
    r.mean0 = m0.mean;
    r.mean1 = m1.mean;
    r.difference = diff.mean;
    r.std_error = diff.std_error;
    r.z_score = z_of(r.difference, r.std_error);
    out.push_back(r);
  }
  return out;
}

}  // namespace localmart
