#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "localmart/ensemble.hpp"
#include "localmart/stopping.hpp"
#include "localmart/strategy.hpp"
#include "localmart/transforms.hpp"

namespace localmart {

/// Branching description: a node value and (probability, child) branches.
struct LatticeSpec {
  double value = 0.0;
  std::vector<std::pair<double, LatticeSpec>> branches;

  /// `1 {0.5: 2, 0.5: 0.5 {1: 0.5}}`; the inverse of parse_lattice_spec.
  std::string describe() const;
};

/// Parses the tree grammar used in scenario files. ValidationError with the
/// character offset on malformed input.
LatticeSpec parse_lattice_spec(const std::string& text);

/// A finite tree market. Leaves shallower than the deepest one are padded
/// with constant single-branch chains so every path has depth() steps; time
/// index t on a path is the node at depth t.
class Lattice {
 public:
  struct Node {
    double value = 0.0;
    std::size_t depth = 0;
    std::ptrdiff_t parent = -1;
    /// Probability of the branch from the parent (1 for the root).
    double prob = 1.0;
    std::vector<std::size_t> children;
    /// Leaves below this node occupy the path indices [leaf_begin, leaf_end).
    std::size_t leaf_begin = 0;
    std::size_t leaf_end = 0;
  };

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t n_paths() const noexcept { return leaves_.size(); }
  /// Leaf node of each path, in depth-first order.
  const std::vector<std::size_t>& leaves() const noexcept { return leaves_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  /// Node at depth t on path p.
  std::size_t node_on_path(std::size_t p, std::size_t t) const { return path_nodes_[p * (depth_ + 1) + t]; }
  double value_on_path(std::size_t p, std::size_t t) const { return nodes_[node_on_path(p, t)].value; }

  /// Exact ensemble on the integer grid 0, 1, ..., depth().
  PathEnsemble to_ensemble() const;
  /// Same tree with every value passed through `map`. ValidationError when
  /// the map merges sibling values.
  Lattice mapped(const MonotoneMap& map) const;
  /// {path passes through node}, as a conjunction of value_equals_at on the
  /// node's ancestors; known at the node's depth.
  EventPredicate node_event(std::size_t node) const;
  LatticeSpec spec() const;

 private:
  friend Lattice build_lattice(const LatticeSpec& spec);
  std::vector<Node> nodes_;
  std::size_t depth_ = 0;
  std::vector<std::size_t> leaves_;
  std::vector<double> weights_;
  std::vector<std::size_t> path_nodes_;
};

/// Validates (depth >= 1, probabilities in (0, 1] summing to 1 within 1e-12,
/// distinct sibling values so the price path reveals the node) and builds.
/// Throws ValidationError.
Lattice build_lattice(const LatticeSpec& spec);

/// Number of stopping times of the tree: s(v) = 1 + prod over children s(c).
double count_stopping_times(const Lattice& lattice);

/// Every stopping time, as the stop depth on each path.
std::vector<std::vector<std::size_t>> enumerate_stopping_times(const Lattice& lattice);

/// Number of ordered pairs tau0 <= tau1 of stopping times.
double count_stopping_pairs(const Lattice& lattice);

struct PairwiseWitness {
  std::vector<std::size_t> tau0;
  std::vector<std::size_t> tau1;
  /// The F_tau0 atom A, given by the node where tau0 stops.
  std::size_t atom = 0;
};

struct PairwiseResult {
  /// True iff no (tau0 <= tau1, A in F_tau0) gives 1_A (X_tau1 - X_tau0) in L0_{++}.
  bool no_arbitrage = true;
  double pairs_examined = 0.0;
  std::optional<PairwiseWitness> witness;
};

/// Brute force over all stopping-time pairs and all atoms of F_tau0 (a union
/// of atoms is a witness iff one of its atoms is). Signs are exact.
/// BudgetExceeded when the pair count exceeds `budget`.
PairwiseResult pairwise_characterization(const Lattice& lattice, double budget = 1e6);

struct LatticeCertificate {
  SimpleStrategy strategy;
  /// Position held over (t, t+1] at each decision node, in node order.
  std::vector<std::pair<std::size_t, double>> labels;
  std::vector<double> gains;
};

struct NoArbitrageResult {
  bool no_arbitrage = true;
  double strategies_examined = 0.0;
  std::string exhaustiveness;
  std::optional<LatticeCertificate> certificate;
};

/// Default alphabets: {0, 1} under the short-sale restriction, {-1, 0, 1} without.
std::vector<double> default_alphabet(bool shortsale_restricted);

/// Enumerates every predictable position process with values in the alphabet
/// (one label per non-leaf node; symmetrized to +-a without the short-sale
/// restriction). Gains are signed exactly. BudgetExceeded when the labeling
/// count exceeds `budget`.
NoArbitrageResult enumerate_no_arbitrage(const Lattice& lattice, bool shortsale_restricted,
                                         const std::vector<double>& alphabet, double budget = 1e6);
NoArbitrageResult enumerate_no_arbitrage(const Lattice& lattice, bool shortsale_restricted);

/// Up to max_count arbitrage labelings in enumeration order.
std::vector<LatticeCertificate> find_arbitrages(const Lattice& lattice, bool shortsale_restricted,
                                                const std::vector<double>& alphabet, std::size_t max_count,
                                                double budget = 1e6);

/// Sign of the exact real sum of the given doubles.
int exact_sum_sign(const std::vector<double>& terms);

}  // namespace localmart
