#include "localmart/lattice.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>

#include "localmart/errors.hpp"
#include "localmart/format.hpp"

namespace localmart {

// ---------------------------------------------------------------------------
// LatticeSpec text grammar

std::string LatticeSpec::describe() const {
  std::string out = fmt_num(value);
  if (branches.empty()) return out;
  out += " {";
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (i) out += ", ";
    out += fmt_num(branches[i].first) + ": " + branches[i].second.describe();
  }
  out += "}";
  return out;
}

namespace {

class SpecParser {
 public:
  explicit SpecParser(const std::string& text) : s_(text) {}

  LatticeSpec parse() {
    LatticeSpec root = node();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError("lattice spec, offset " + std::to_string(pos_) + ": " + what);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  double number() {
    skip();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }
  LatticeSpec node() {
    LatticeSpec n;
    n.value = number();
    if (!eat('{')) return n;
    do {
      const double p = number();
      if (!eat(':')) fail("expected ':' after branch probability");
      n.branches.emplace_back(p, node());
    } while (eat(','));
    if (!eat('}')) fail("expected '}' or ','");
    return n;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

std::size_t spec_depth(const LatticeSpec& s) {
  std::size_t d = 0;
  for (const auto& [p, c] : s.branches) d = std::max(d, 1 + spec_depth(c));
  return d;
}

void validate_spec(const LatticeSpec& s) {
  if (!std::isfinite(s.value)) throw ValidationError("lattice value is not finite");
  if (s.branches.empty()) return;
  double total = 0.0;
  std::set<double> seen;
  for (const auto& [p, c] : s.branches) {
    if (!(p > 0.0 && p <= 1.0)) {
      throw ValidationError("branch probability " + fmt_num(p) + " outside (0, 1] at node " + fmt_num(s.value));
    }
    total += p;
    if (!seen.insert(c.value).second) {
      throw ValidationError("sibling values must be distinct; " + fmt_num(c.value) + " repeats below node " +
                            fmt_num(s.value));
    }
    validate_spec(c);
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("branch probabilities sum to " + fmt_num(total) + " at node " + fmt_num(s.value));
  }
}

}  // namespace

LatticeSpec parse_lattice_spec(const std::string& text) { return SpecParser(text).parse(); }

// ---------------------------------------------------------------------------
// construction

Lattice build_lattice(const LatticeSpec& spec) {
  validate_spec(spec);
  Lattice L;
  L.depth_ = spec_depth(spec);
  if (L.depth_ == 0) throw ValidationError("lattice needs depth >= 1");

  std::function<std::size_t(const LatticeSpec*, double, std::size_t, std::ptrdiff_t, double)> add =
      [&](const LatticeSpec* s, double value, std::size_t depth, std::ptrdiff_t parent, double prob) {
        const std::size_t id = L.nodes_.size();
        L.nodes_.push_back(Lattice::Node{value, depth, parent, prob, {}, L.leaves_.size(), 0});
        if (s && !s->branches.empty()) {
          for (const auto& [p, c] : s->branches) {
            const std::size_t child = add(&c, c.value, depth + 1, static_cast<std::ptrdiff_t>(id), p);
            L.nodes_[id].children.push_back(child);
          }
        } else if (depth < L.depth_) {
          // Padding: hold the value constant until the common horizon.
          const std::size_t child = add(nullptr, value, depth + 1, static_cast<std::ptrdiff_t>(id), 1.0);
          L.nodes_[id].children.push_back(child);
        } else {
          L.leaves_.push_back(id);
        }
        L.nodes_[id].leaf_end = L.leaves_.size();
        return id;
      };
  add(&spec, spec.value, 0, -1, 1.0);

  const std::size_t stride = L.depth_ + 1;
  L.path_nodes_.assign(L.leaves_.size() * stride, 0);
  L.weights_.assign(L.leaves_.size(), 1.0);
  double total = 0.0;
  for (std::size_t p = 0; p < L.leaves_.size(); ++p) {
    std::ptrdiff_t n = static_cast<std::ptrdiff_t>(L.leaves_[p]);
    while (n >= 0) {
      const auto& node = L.nodes_[static_cast<std::size_t>(n)];
      L.path_nodes_[p * stride + node.depth] = static_cast<std::size_t>(n);
      L.weights_[p] *= node.prob;
      n = node.parent;
    }
    total += L.weights_[p];
  }
  // Per-node sums are validated to 1e-12; remove the accumulated drift.
  for (double& w : L.weights_) w /= total;
  return L;
}

PathEnsemble Lattice::to_ensemble() const {
  std::vector<std::vector<double>> rows(n_paths(), std::vector<double>(depth_ + 1));
  for (std::size_t p = 0; p < n_paths(); ++p) {
    for (std::size_t t = 0; t <= depth_; ++t) rows[p][t] = value_on_path(p, t);
  }
  return PathEnsemble::exact(TimeGrid::uniform(static_cast<double>(depth_), depth_), rows, weights_)
      .with_metadata("model", "lattice");
}

LatticeSpec Lattice::spec() const {
  std::function<LatticeSpec(std::size_t)> rec = [&](std::size_t id) {
    LatticeSpec s;
    s.value = nodes_[id].value;
    for (std::size_t c : nodes_[id].children) s.branches.emplace_back(nodes_[c].prob, rec(c));
    return s;
  };
  return rec(0);
}

Lattice Lattice::mapped(const MonotoneMap& map) const {
  std::function<void(LatticeSpec&)> rec = [&](LatticeSpec& s) {
    if (!map.in_domain(s.value)) throw DomainError(map.describe() + " undefined at lattice value " + fmt_num(s.value));
    s.value = map(s.value);
    for (auto& [p, c] : s.branches) rec(c);
  };
  LatticeSpec s = spec();
  rec(s);
  return build_lattice(s);
}

EventPredicate Lattice::node_event(std::size_t node) const {
  std::vector<EventPredicate> parts;
  std::ptrdiff_t n = static_cast<std::ptrdiff_t>(node);
  while (n >= 0) {
    const auto& nd = nodes_[static_cast<std::size_t>(n)];
    parts.push_back(EventPredicate::value_equals_at(StoppingRule::deterministic(static_cast<double>(nd.depth)), nd.value));
    n = nd.parent;
  }
  std::reverse(parts.begin(), parts.end());
  return parts.size() == 1 ? parts.front() : EventPredicate::all_of(std::move(parts));
}

// ---------------------------------------------------------------------------
// stopping times

namespace {

double count_from(const Lattice& L, std::size_t v) {
  const auto& node = L.nodes()[v];
  if (node.children.empty()) return 1.0;
  double prod = 1.0;
  for (std::size_t c : node.children) prod *= count_from(L, c);
  return 1.0 + prod;
}

double pairs_from(const Lattice& L, std::size_t v) {
  const auto& node = L.nodes()[v];
  if (node.children.empty()) return 1.0;
  double prod = 1.0;
  for (std::size_t c : node.children) prod *= pairs_from(L, c);
  // tau0 stops at v (then tau1 is any stopping time from v), or tau0 continues.
  return count_from(L, v) + prod;
}

using StopTable = std::vector<std::vector<std::size_t>>;

// Every stopping time started at v, as stop depths on the paths below v.
const StopTable& stopping_from(const Lattice& L, std::size_t v, std::vector<std::optional<StopTable>>& memo) {
  if (memo[v]) return *memo[v];
  const auto& node = L.nodes()[v];
  const std::size_t width = node.leaf_end - node.leaf_begin;
  StopTable out;
  out.emplace_back(width, node.depth);
  if (!node.children.empty()) {
    StopTable acc{{}};
    for (std::size_t c : node.children) {
      const StopTable& sub = stopping_from(L, c, memo);
      StopTable next;
      next.reserve(acc.size() * sub.size());
      for (const auto& prefix : acc) {
        for (const auto& tail : sub) {
          auto row = prefix;
          row.insert(row.end(), tail.begin(), tail.end());
          next.push_back(std::move(row));
        }
      }
      acc = std::move(next);
    }
    for (auto& row : acc) out.push_back(std::move(row));
  }
  memo[v] = std::move(out);
  return *memo[v];
}

}  // namespace

double count_stopping_times(const Lattice& lattice) { return count_from(lattice, 0); }

double count_stopping_pairs(const Lattice& lattice) { return pairs_from(lattice, 0); }

std::vector<std::vector<std::size_t>> enumerate_stopping_times(const Lattice& lattice) {
  std::vector<std::optional<StopTable>> memo(lattice.nodes().size());
  return stopping_from(lattice, 0, memo);
}

PairwiseResult pairwise_characterization(const Lattice& lattice, double budget) {
  const double needed = count_stopping_pairs(lattice);
  if (needed > budget) throw BudgetExceeded("pairwise characterization over budget " + fmt_num(budget), needed);

  const auto& nodes = lattice.nodes();
  std::vector<std::optional<StopTable>> memo(nodes.size());
  // For each node v: a stopping time sigma >= v with X_sigma - X_v >= 0 on
  // every path through v and > 0 on one, if any exists.
  std::vector<int> checked(nodes.size(), 0);
  std::vector<std::optional<std::vector<std::size_t>>> good(nodes.size());
  auto good_at = [&](std::size_t v) -> const std::optional<std::vector<std::size_t>>& {
    if (checked[v]) return good[v];
    checked[v] = 1;
    const auto& node = nodes[v];
    for (const auto& sigma : stopping_from(lattice, v, memo)) {
      bool nonneg = true;
      bool positive = false;
      for (std::size_t p = node.leaf_begin; p < node.leaf_end && nonneg; ++p) {
        const double x = lattice.value_on_path(p, sigma[p - node.leaf_begin]);
        if (x < node.value) nonneg = false;
        if (x > node.value) positive = true;
      }
      if (nonneg && positive) {
        good[v] = sigma;
        break;
      }
    }
    return good[v];
  };

  PairwiseResult result;
  for (const auto& tau0 : stopping_from(lattice, 0, memo)) {
    std::vector<std::size_t> atoms;
    for (std::size_t p = 0; p < lattice.n_paths(); ++p) {
      const std::size_t a = lattice.node_on_path(p, tau0[p]);
      if (atoms.empty() || atoms.back() != a) atoms.push_back(a);
    }
    double tau1_count = 1.0;
    for (std::size_t a : atoms) tau1_count *= count_from(lattice, a);
    result.pairs_examined += tau1_count;
    for (std::size_t a : atoms) {
      const auto& sigma = good_at(a);
      if (!sigma) continue;
      PairwiseWitness w{tau0, tau0, a};
      std::copy(sigma->begin(), sigma->end(), w.tau1.begin() + static_cast<std::ptrdiff_t>(nodes[a].leaf_begin));
      result.no_arbitrage = false;
      result.witness = std::move(w);
      return result;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// strategy enumeration

namespace {

void two_sum(double a, double b, double& s, double& err) {
  s = a + b;
  const double bv = s - a;
  const double av = s - bv;
  err = (a - av) + (b - bv);
}

std::vector<double> prepare_alphabet(bool shortsale_restricted, const std::vector<double>& alphabet) {
  if (alphabet.empty()) throw ParameterError("weight alphabet is empty");
  std::set<double> out;
  for (double a : alphabet) {
    if (!std::isfinite(a)) throw ParameterError("weight alphabet entries must be finite");
    if (shortsale_restricted && a < 0.0) {
      throw ParameterError("short-sale restricted enumeration needs a nonnegative alphabet");
    }
    out.insert(a);
    if (!shortsale_restricted) out.insert(-a);
  }
  out.insert(0.0);
  return {out.begin(), out.end()};
}

LatticeCertificate make_certificate(const Lattice& L, const std::vector<std::size_t>& decision,
                                    const std::vector<double>& labels, bool shortsale_restricted) {
  LatticeCertificate cert;
  cert.strategy.shortsale_restricted = shortsale_restricted;
  for (std::size_t t = 0; t < L.depth(); ++t) {
    std::vector<WeightRule> parts;
    for (std::size_t j = 0; j < decision.size(); ++j) {
      if (labels[j] == 0.0 || L.nodes()[decision[j]].depth != t) continue;
      parts.push_back(WeightRule::indicator(L.node_event(decision[j]), labels[j]));
      cert.labels.emplace_back(decision[j], labels[j]);
    }
    if (parts.empty()) continue;
    WeightRule w = parts.size() == 1 ? parts.front() : WeightRule::sum(std::move(parts));
    cert.strategy.legs.push_back(Leg{StoppingRule::deterministic(static_cast<double>(t)),
                                     StoppingRule::deterministic(static_cast<double>(t + 1)), w});
  }
  cert.gains = strategy_gain(cert.strategy, L.to_ensemble());
  return cert;
}

}  // namespace

int exact_sum_sign(const std::vector<double>& terms) {
  // Nonoverlapping expansion in increasing magnitude; its sign is the sign of
  // the largest component.
  std::vector<double> e;
  std::vector<double> next;
  for (double b : terms) {
    double q = b;
    next.clear();
    for (double ei : e) {
      double s, h;
      two_sum(q, ei, s, h);
      if (h != 0.0) next.push_back(h);
      q = s;
    }
    if (q != 0.0) next.push_back(q);
    e.swap(next);
  }
  if (e.empty()) return 0;
  return e.back() > 0.0 ? 1 : -1;
}

std::vector<double> default_alphabet(bool shortsale_restricted) {
  return shortsale_restricted ? std::vector<double>{0.0, 1.0} : std::vector<double>{-1.0, 0.0, 1.0};
}

std::vector<LatticeCertificate> find_arbitrages(const Lattice& lattice, bool shortsale_restricted,
                                                const std::vector<double>& alphabet, std::size_t max_count,
                                                double budget) {
  const std::vector<double> alpha = prepare_alphabet(shortsale_restricted, alphabet);
  std::vector<std::size_t> decision;
  for (std::size_t v = 0; v < lattice.nodes().size(); ++v) {
    if (!lattice.nodes()[v].children.empty()) decision.push_back(v);
  }
  const double needed = std::pow(static_cast<double>(alpha.size()), static_cast<double>(decision.size()));
  if (needed > budget) throw BudgetExceeded("strategy enumeration over budget " + fmt_num(budget), needed);

  // label_of[node] is the position held over the step leaving that node.
  std::vector<std::size_t> digit(decision.size(), 0);
  std::vector<double> label_of(lattice.nodes().size(), 0.0);
  for (std::size_t j = 0; j < decision.size(); ++j) label_of[decision[j]] = alpha[0];

  std::vector<LatticeCertificate> found;
  std::vector<double> terms;
  const std::size_t total = static_cast<std::size_t>(needed);
  for (std::size_t iter = 0; iter < total; ++iter) {
    bool nonneg = true;
    bool positive = false;
    for (std::size_t p = 0; p < lattice.n_paths() && nonneg; ++p) {
      terms.clear();
      for (std::size_t t = 0; t < lattice.depth(); ++t) {
        const double w = label_of[lattice.node_on_path(p, t)];
        if (w == 0.0) continue;
        for (const auto& [x, sign] : {std::pair{lattice.value_on_path(p, t + 1), 1.0},
                                      std::pair{lattice.value_on_path(p, t), -1.0}}) {
          const double prod = sign * w * x;
          terms.push_back(prod);
          terms.push_back(std::fma(sign * w, x, -prod));
        }
      }
      const int s = exact_sum_sign(terms);
      if (s < 0) nonneg = false;
      if (s > 0) positive = true;
    }
    if (nonneg && positive) {
      std::vector<double> labels(decision.size());
      for (std::size_t j = 0; j < decision.size(); ++j) labels[j] = label_of[decision[j]];
      found.push_back(make_certificate(lattice, decision, labels, shortsale_restricted));
      if (found.size() >= max_count) break;
    }
    // Mixed-radix increment.
    for (std::size_t j = 0; j < decision.size(); ++j) {
      if (++digit[j] < alpha.size()) {
        label_of[decision[j]] = alpha[digit[j]];
        break;
      }
      digit[j] = 0;
      label_of[decision[j]] = alpha[0];
    }
  }
  return found;
}

NoArbitrageResult enumerate_no_arbitrage(const Lattice& lattice, bool shortsale_restricted,
                                         const std::vector<double>& alphabet, double budget) {
  const std::vector<double> alpha = prepare_alphabet(shortsale_restricted, alphabet);
  std::size_t n_decision = 0;
  for (const auto& n : lattice.nodes()) n_decision += n.children.empty() ? 0 : 1;
  const double total = std::pow(static_cast<double>(alpha.size()), static_cast<double>(n_decision));

  NoArbitrageResult r;
  auto found = find_arbitrages(lattice, shortsale_restricted, alphabet, 1, budget);
  std::ostringstream os;
  os << "exhaustive over " << fmt_num(total) << " position processes (" << n_decision
     << " decision nodes, alphabet {";
  for (std::size_t i = 0; i < alpha.size(); ++i) os << (i ? ", " : "") << fmt_num(alpha[i]);
  os << "})";
  r.exhaustiveness = os.str();
  r.strategies_examined = total;
  if (!found.empty()) {
    r.no_arbitrage = false;
    r.certificate = std::move(found.front());
    r.exhaustiveness = "arbitrage found; search space " + os.str().substr(std::string("exhaustive over ").size());
  }
  return r;
}

NoArbitrageResult enumerate_no_arbitrage(const Lattice& lattice, bool shortsale_restricted) {
  return enumerate_no_arbitrage(lattice, shortsale_restricted, default_alphabet(shortsale_restricted));
}

}  // namespace localmart
