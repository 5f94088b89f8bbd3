#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "localmart/ensemble.hpp"
#include "localmart/stopping.hpp"

namespace localmart {

enum class DefectClass { martingale_consistent, strict_local_suspected, inconclusive };
std::string to_string(DefectClass c);

struct DefectRow {
  double t = 0.0;
  double sample_mean = 0.0;
  double std_error = 0.0;
  /// x0 - sample mean.
  double defect = 0.0;
  /// defect / std_error; 0 when both vanish, +-inf for a nonzero exact defect.
  double z_score = 0.0;
};

struct DefectOptions {
  /// STRICT_LOCAL_SUSPECTED iff max z >= z_threshold.
  double z_threshold = 5.0;
  /// MARTINGALE_CONSISTENT iff every |z| < consistent_threshold.
  double consistent_threshold = 3.0;
};

struct DefectTable {
  std::vector<DefectRow> rows;
  DefectClass classification = DefectClass::inconclusive;
  DefectOptions options;
  std::vector<std::string> notes;
};

/// Weighted mean of X_t at each requested grid time and the defect
/// E[X_0 - X_t], estimated from the per-path increments so that the defect at
/// t = 0 is exactly zero. Standard errors use the Kish effective sample size.
/// Times must be grid points (DomainError otherwise); empty times are a
/// ParameterError.
DefectTable martingale_defect(const PathEnsemble& ensemble, const std::vector<double>& times,
                              const DefectOptions& options = {});

/// Every grid time.
DefectTable martingale_defect(const PathEnsemble& ensemble, const DefectOptions& options = {});

struct StoppedPair {
  StoppingRule tau0;
  StoppingRule tau1;
};

struct StoppedPairResult {
  std::string tau0;
  std::string tau1;
  double mean0 = 0.0;
  double mean1 = 0.0;
  /// E[X_tau0] - E[X_tau1].
  double difference = 0.0;
  /// Standard error of the paired difference.
  double std_error = 0.0;
  double z_score = 0.0;
};

std::vector<StoppedPairResult> stopped_pair_check(const PathEnsemble& ensemble,
                                                  const std::vector<StoppedPair>& pairs);

}  // namespace localmart
