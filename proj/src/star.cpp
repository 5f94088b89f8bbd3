#include "localmart/star.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "localmart/errors.hpp"
#include "localmart/format.hpp"
#include "localmart/parallel.hpp"

namespace localmart {

std::string StarProbe::describe() const {
  std::ostringstream os;
  os << tau.describe() << " | " << event.describe() << " | " << fmt_num(horizon) << " |";
  for (std::size_t i = 0; i < epsilons.size(); ++i) os << (i ? ", " : " ") << fmt_num(epsilons[i]);
  return os.str();
}

std::string to_string(StarVerdict v) {
  switch (v) {
    case StarVerdict::consistent:
      return "CONSISTENT";
    case StarVerdict::violation_suspected:
      return "VIOLATION_SUSPECTED";
    case StarVerdict::underpowered:
      return "UNDERPOWERED";
  }
  return "UNDERPOWERED";
}

std::pair<double, double> wilson_interval(double p, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(std::max(0.0, p * (1.0 - p) / nn + z2 / (4.0 * nn * nn))) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

StarReport star_probe(const PathEnsemble& ensemble, const StarProbe& probe, const StarOptions& options) {
  return star_probe(ensemble, ensemble, probe, options);
}

StarReport star_probe(const PathEnsemble& signals, const PathEnsemble& prices, const StarProbe& probe,
                      const StarOptions& options) {
  if (signals.n_paths() != prices.n_paths() || !(signals.grid() == prices.grid())) {
    throw ParameterError("signal and price ensembles must share paths and grid");
  }
  const TimeGrid& grid = signals.grid();
  if (probe.horizon > grid.horizon() + grid.tolerance()) throw DomainError("probe horizon lies beyond the grid");
  if (probe.horizon + grid.tolerance() < probe.tau.cap()) throw ParameterError("probe horizon precedes the tau cap");
  if (probe.epsilons.empty()) throw ParameterError("probe needs at least one epsilon");
  for (double e : probe.epsilons) {
    if (!(e > 0.0)) throw ParameterError("probe epsilons must be positive");
  }
  const std::size_t t_index = grid.index_at_or_before(probe.horizon);
  const std::size_t n = signals.n_paths();

  // Per path: in A, and the running minimum of X_t - X_tau over [tau, T].
  std::vector<char> in_event(n, 0);
  std::vector<double> running_min(n, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const PathView sig = signals.path(i);
      const std::size_t tau = probe.tau.resolve(sig);
      auto a = probe.event.known_by(sig, tau);
      if (!a) throw DomainError("probe event is not known at tau: " + probe.event.describe());
      in_event[i] = *a ? 1 : 0;
      if (!*a) continue;
      auto x = prices.row(i);
      double m = 0.0;
      for (std::size_t k = tau; k <= t_index; ++k) m = std::min(m, x[k] - x[tau]);
      running_min[i] = m;
    }
  });

  StarReport report;
  report.probe = probe.describe();
  report.n_paths = n;
  report.min_count = options.min_count;
  for (double eps : probe.epsilons) {
    StarEntry e;
    e.epsilon = eps;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = signals.weight(i);
      if (!in_event[i] || !(w > 0.0)) continue;
      e.p_event += w;
      ++e.n_event;
      if (running_min[i] > -eps) {
        e.p_hat += w;
        ++e.n_joint;
      }
    }
    if (is_uniform(signals.weights())) {
      e.p_event = static_cast<double>(e.n_event) / static_cast<double>(n);
      e.p_hat = static_cast<double>(e.n_joint) / static_cast<double>(n);
    }
    std::tie(e.ci_low, e.ci_high) = wilson_interval(e.p_hat, n);
    if (e.n_event < options.min_count || e.n_event == 0) {
      e.verdict = StarVerdict::underpowered;
    } else if (e.n_joint == 0) {
      e.verdict = StarVerdict::violation_suspected;
    } else {
      e.verdict = StarVerdict::consistent;
    }
    report.entries.push_back(e);
  }
  return report;
}

StarScan star_scan(const PathEnsemble& ensemble, const std::vector<StarProbe>& probes, const StarOptions& options) {
  return star_scan(ensemble, ensemble, probes, options);
}

StarScan star_scan(const PathEnsemble& signals, const PathEnsemble& prices, const std::vector<StarProbe>& probes,
                   const StarOptions& options) {
  if (probes.empty()) throw ParameterError("star scan needs at least one probe");
  StarScan scan;
  for (const auto& p : probes) {
    scan.reports.push_back(star_probe(signals, prices, p, options));
    for (const auto& e : scan.reports.back().entries) {
      if (e.verdict == StarVerdict::violation_suspected) scan.overall = StarVerdict::violation_suspected;
    }
  }
  return scan;
}

}  // namespace localmart
