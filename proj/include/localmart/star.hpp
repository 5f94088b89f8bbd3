#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "localmart/ensemble.hpp"
#include "localmart/stopping.hpp"

namespace localmart {

/// (tau, A, T, epsilons): one instance of the stay-above condition
/// P(A and inf_{t in [tau, T]} (X_t - X_tau) > -eps) > 0.
struct StarProbe {
  StoppingRule tau;
  EventPredicate event;
  double horizon = 1.0;
  std::vector<double> epsilons;

  std::string describe() const;
};

enum class StarVerdict { consistent, violation_suspected, underpowered };
std::string to_string(StarVerdict v);

struct StarEntry {
  double epsilon = 0.0;
  /// Estimate of the joint probability.
  double p_hat = 0.0;
  double p_event = 0.0;
  std::size_t n_event = 0;
  std::size_t n_joint = 0;
  /// Wilson 95% interval for p_hat.
  double ci_low = 0.0;
  double ci_high = 0.0;
  StarVerdict verdict = StarVerdict::underpowered;
};

struct StarReport {
  std::string probe;
  std::size_t n_paths = 0;
  std::size_t min_count = 0;
  std::vector<StarEntry> entries;
};

struct StarOptions {
  /// Paths required in A before a zero count is called a violation.
  std::size_t min_count = 100;
};

/// Wilson score interval for a proportion p observed on n trials.
std::pair<double, double> wilson_interval(double p, std::size_t n, double z = 1.959963984540054);

/// Evaluates the probe on every path. The verdict per epsilon is
/// UNDERPOWERED when fewer than min_count paths lie in A, VIOLATION_SUSPECTED
/// when none of them stays above X_tau - eps, CONSISTENT otherwise.
/// Monte Carlo can only suspect a violation; a CONSISTENT answer never
/// certifies the condition over all stopping times.
StarReport star_probe(const PathEnsemble& ensemble, const StarProbe& probe, const StarOptions& options = {});

/// As above, with tau and A resolved on `signals` and increments measured on
/// `prices` (the same filtration observed through a transformed price).
StarReport star_probe(const PathEnsemble& signals, const PathEnsemble& prices, const StarProbe& probe,
                      const StarOptions& options = {});

struct StarScan {
  std::vector<StarReport> reports;
  /// VIOLATION_SUSPECTED iff any probe yields it, otherwise CONSISTENT.
  StarVerdict overall = StarVerdict::consistent;
};

StarScan star_scan(const PathEnsemble& ensemble, const std::vector<StarProbe>& probes,
                   const StarOptions& options = {});
StarScan star_scan(const PathEnsemble& signals, const PathEnsemble& prices, const std::vector<StarProbe>& probes,
                   const StarOptions& options = {});

}  // namespace localmart
