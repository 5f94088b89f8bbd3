#include "localmart/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "localmart/errors.hpp"
#include "localmart/format.hpp"
#include "localmart/parallel.hpp"
#include "localmart/process.hpp"

namespace localmart {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double pwl_eval(const maps::PiecewiseLinear& m, double x) {
  const auto& k = m.knots;
  std::size_t j = 0;
  if (x <= k.front().first) {
    j = 0;
  } else if (x >= k.back().first) {
    j = k.size() - 2;
  } else {
    auto it = std::upper_bound(k.begin(), k.end(), x, [](double v, const auto& p) { return v < p.first; });
    j = static_cast<std::size_t>(it - k.begin()) - 1;
  }
  const auto& [x0, y0] = k[j];
  const auto& [x1, y1] = k[j + 1];
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

}  // namespace

MonotoneMap::MonotoneMap(Variant v) : v_(std::move(v)) {
  std::visit(overloaded{
                 [](const maps::Affine& m) {
                   if (!(m.alpha > 0.0) || !std::isfinite(m.alpha) || !std::isfinite(m.beta)) {
                     throw ParameterError("affine map needs a finite alpha > 0");
                   }
                 },
                 [](const maps::Exp&) {},
                 [](const maps::Log&) {},
                 [](const maps::Power& m) {
                   if (!(m.p > 0.0) || !std::isfinite(m.p)) throw ParameterError("power map needs p > 0");
                 },
                 [](const maps::NegPower& m) {
                   if (!(m.q > 0.0) || !std::isfinite(m.q)) throw ParameterError("neg_power map needs q > 0");
                 },
                 [](const maps::PiecewiseLinear& m) {
                   if (m.knots.size() < 2) throw ParameterError("piecewise_linear map needs at least two knots");
                   for (std::size_t i = 1; i < m.knots.size(); ++i) {
                     const auto& [xa, ya] = m.knots[i - 1];
                     const auto& [xb, yb] = m.knots[i];
                     if (!(xb > xa)) throw ParameterError("piecewise_linear knots must be strictly increasing in x");
                     if (m.strict ? !(yb > ya) : !(yb >= ya)) {
                       throw ParameterError(m.strict ? "strict piecewise_linear map needs positive slopes"
                                                     : "piecewise_linear map needs nonnegative slopes");
                     }
                   }
                 },
             },
             v_);
}

double MonotoneMap::operator()(double x) const {
  return std::visit(overloaded{
                        [x](const maps::Affine& m) { return m.alpha * x + m.beta; },
                        [x](const maps::Exp&) { return std::exp(x); },
                        [x](const maps::Log&) { return std::log(x); },
                        [x](const maps::Power& m) {
                          if (m.p == 1.0) return x;
                          if (m.p == 2.0) return x * x;
                          return std::pow(x, m.p);
                        },
                        [x](const maps::NegPower& m) {
                          if (m.q == 1.0) return 1.0 / x;
                          return std::pow(x, -m.q);
                        },
                        [x](const maps::PiecewiseLinear& m) { return pwl_eval(m, x); },
                    },
                    v_);
}

bool MonotoneMap::in_domain(double x) const {
  if (!std::isfinite(x)) return false;
  return std::visit(overloaded{
                        [](const maps::Affine&) { return true; },
                        [x](const maps::Exp&) { return x < std::log(std::numeric_limits<double>::max()); },
                        [x](const maps::Log&) { return x > 0.0; },
                        [x](const maps::Power&) { return x > 0.0; },
                        [x](const maps::NegPower&) { return x > 0.0; },
                        [](const maps::PiecewiseLinear&) { return true; },
                    },
                    v_);
}

bool MonotoneMap::increasing() const { return !std::holds_alternative<maps::NegPower>(v_); }

bool MonotoneMap::strict() const {
  if (const auto* m = std::get_if<maps::PiecewiseLinear>(&v_)) return m->strict;
  return true;
}

double MonotoneMap::modulus(double lo, double hi, double eps) const {
  if (!(eps >= 0.0)) throw ParameterError("modulus needs eps >= 0");
  if (hi < lo) throw ParameterError("modulus needs lo <= hi");
  const MonotoneMap& f = *this;
  if (hi - lo <= eps) return std::abs(f(hi) - f(lo));
  return std::visit(
      overloaded{
          [&](const maps::Affine& m) { return m.alpha * eps; },
          // Convex increasing: the steepest window sits at the right end.
          [&](const maps::Exp&) { return f(hi) - f(hi - eps); },
          // Concave increasing: the steepest window sits at the left end.
          [&](const maps::Log&) { return f(lo + eps) - f(lo); },
          [&](const maps::Power& m) { return m.p >= 1.0 ? f(hi) - f(hi - eps) : f(lo + eps) - f(lo); },
          // Convex decreasing: steepest at the left end.
          [&](const maps::NegPower&) { return f(lo) - f(lo + eps); },
          [&](const maps::PiecewiseLinear& m) {
            // f(x + eps) - f(x) is piecewise linear in x with breaks where x or
            // x + eps crosses a knot, so its maximum is at one of those points.
            std::vector<double> xs{lo, hi - eps};
            for (const auto& [kx, ky] : m.knots) {
              xs.push_back(kx);
              xs.push_back(kx - eps);
            }
            double best = 0.0;
            for (double x : xs) {
              const double c = std::clamp(x, lo, hi - eps);
              best = std::max(best, f(c + eps) - f(c));
            }
            return best;
          },
      },
      v_);
}

std::string MonotoneMap::describe() const {
  return std::visit(overloaded{
                        [](const maps::Affine& m) {
                          return "affine(" + fmt_num(m.alpha) + ", " + fmt_num(m.beta) + ")";
                        },
                        [](const maps::Exp&) { return std::string("exp"); },
                        [](const maps::Log&) { return std::string("log"); },
                        [](const maps::Power& m) { return "power(" + fmt_num(m.p) + ")"; },
                        [](const maps::NegPower& m) { return "neg_power(" + fmt_num(m.q) + ")"; },
                        [](const maps::PiecewiseLinear& m) {
                          std::ostringstream os;
                          os << (m.strict ? "piecewise_linear(" : "piecewise_linear_nondecreasing(");
                          for (std::size_t i = 0; i < m.knots.size(); ++i) {
                            if (i) os << ", ";
                            os << fmt_num(m.knots[i].first) << ":" << fmt_num(m.knots[i].second);
                          }
                          os << ")";
                          return os.str();
                        },
                    },
                    v_);
}

PathEnsemble apply_monotone(const MonotoneMap& map, const PathEnsemble& ensemble) {
  const std::size_t n_times = ensemble.n_times();
  std::vector<double> out(ensemble.values().size());
  parallel_for(ensemble.n_paths(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto x = ensemble.row(i);
      for (std::size_t k = 0; k < n_times; ++k) {
        if (!map.in_domain(x[k])) {
          throw DomainError(map.describe() + " undefined at path " + std::to_string(i) + ", t = " +
                            fmt_num(ensemble.grid()[k]) + " (value " + fmt_num(x[k]) + ")");
        }
        out[i * n_times + k] = map(x[k]);
      }
    }
  });
  return ensemble.with_values(std::move(out)).with_metadata("transform", map.describe());
}

PathEnsemble drift_compensate(const PathEnsemble& ensemble) {
  const PathEnsemble qv = realized_quadratic_variation(ensemble);
  std::vector<double> out(ensemble.values().begin(), ensemble.values().end());
  const auto& q = qv.values();
  for (std::size_t j = 0; j < out.size(); ++j) out[j] -= 0.5 * q[j];
  return ensemble.with_values(std::move(out)).with_metadata("transform", "drift_compensate");
}

PathEnsemble stochastic_exponential(const PathEnsemble& ensemble) {
  const PathEnsemble y = drift_compensate(ensemble);
  const double max_log = std::log(std::numeric_limits<double>::max());
  const double floor = std::numeric_limits<double>::min();
  const std::size_t n_times = ensemble.n_times();
  std::vector<double> out(y.values().size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double v = y.values()[j];
    if (!(v < max_log)) {
      throw DomainError("stochastic exponential overflows at path " + std::to_string(j / n_times) + ", t = " +
                        fmt_num(ensemble.grid()[j % n_times]));
    }
    out[j] = std::max(std::exp(v), floor);
  }
  return ensemble.with_values(std::move(out)).with_metadata("transform", "stochastic_exponential");
}

namespace {

double star_epsilon(const MonotoneMap& map, const PathEnsemble& ensemble, double eps) {
  if (const auto* a = std::get_if<maps::Affine>(&map.variant())) return a->alpha * eps;
  const double m = map.modulus(ensemble.min_value(), ensemble.max_value(), eps);
  return std::max(m, std::numeric_limits<double>::min());
}

}  // namespace

InvarianceReport star_invariance(const MonotoneMap& map, const PathEnsemble& ensemble,
                                 const std::vector<StarProbe>& probes, const StarOptions& options) {
  if (!map.increasing()) throw ParameterError("star invariance needs a nondecreasing map");
  const PathEnsemble mapped = apply_monotone(map, ensemble);
  std::vector<StarProbe> mapped_probes = probes;
  for (auto& p : mapped_probes) {
    for (double& e : p.epsilons) e = star_epsilon(map, ensemble, e);
  }
  const StarScan a = star_scan(ensemble, probes, options);
  const StarScan b = star_scan(ensemble, mapped, mapped_probes, options);

  InvarianceReport r;
  r.mode = "star";
  r.map = map.describe();
  r.before = to_string(a.overall);
  r.after = to_string(b.overall);
  r.pass = a.overall == b.overall;
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    for (std::size_t j = 0; j < a.reports[i].entries.size(); ++j) {
      r.p_hats.emplace_back(a.reports[i].entries[j].p_hat, b.reports[i].entries[j].p_hat);
    }
  }
  return r;
}

InvarianceReport s0_invariance(const MonotoneMap& map, const PathEnsemble& ensemble,
                               const std::vector<LegCandidate>& family) {
  if (!map.increasing() || !map.strict()) {
    throw ParameterError("S0 invariance needs a strictly increasing map, got " + map.describe());
  }
  const PathEnsemble mapped = apply_monotone(map, ensemble);
  const SearchResult a = search_single_leg(ensemble, family, true, Tolerances::for_ensemble(ensemble));
  const SearchResult b = search_single_leg(ensemble, mapped, family, true, Tolerances::for_ensemble(mapped));

  InvarianceReport r;
  r.mode = "s0";
  r.map = map.describe();
  r.before = to_string(a.verdict);
  r.after = to_string(b.verdict);
  r.pass = a.verdict == b.verdict;
  return r;
}

}  // namespace localmart
