#pragma once

// Exact minimizers of the MRF energy by enumeration, for small graphs.

#include <limits>
#include <vector>

#include "mrfmatch/core.hpp"
#include "mrfmatch/graph.hpp"

namespace mrfmatch {

struct OracleResult {
  std::vector<Correspondence> best_assignment;
  std::vector<std::size_t> best_labels;
  EnergyBreakdown best_energy;
  /// Assignments covered, explicitly or by a pruning bound. Always the
  /// product of the label counts.
  double enumerated = 0.0;
  /// Complete assignments actually evaluated.
  double visited = 0.0;
};

inline constexpr double kOracleStateLimit = 1e7;

namespace detail {

inline double state_space(const MatchGraph& graph) {
  double states = 1.0;
  for (const auto& n : graph.nodes()) states *= static_cast<double>(n.label_count());
  if (states > kOracleStateLimit) {
    throw InputError("oracle state space exceeds " + std::to_string(kOracleStateLimit));
  }
  return states;
}

}  // namespace detail

/// Depth-first enumeration in node order with branch-and-bound pruning.
/// All energy terms are non-negative, so a partial sum above the incumbent
/// can be abandoned. Ties keep the lexicographically first labeling.
inline OracleResult exhaustive_minimize(const MatchGraph& graph, double lambda) {
  OracleResult res;
  res.enumerated = detail::state_space(graph);
  const std::size_t n = graph.size();
  if (n == 0) return res;

  // suffix[i]: number of assignments of nodes i..n-1
  std::vector<double> suffix(n + 1, 1.0);
  for (std::size_t i = n; i-- > 0;) {
    suffix[i] = suffix[i + 1] * static_cast<double>(graph.node(i).label_count());
  }

  std::vector<std::size_t> labels(n, 0), best;
  double best_energy = std::numeric_limits<double>::infinity();
  double covered = 0.0;

  // Energy added by fixing node i given nodes < i: its unary plus both
  // ordered directions of every edge back to an earlier node.
  auto increment = [&](std::size_t i) {
    double e = graph.node(i).unary[labels[i]];
    for (const Adjacent& a : graph.neighbors(i)) {
      if (a.node < i) e += lambda * 2.0 * graph.pairwise(a.edge, i, labels[i], labels[a.node]);
    }
    return e;
  };

  auto search = [&](auto&& self, std::size_t i, double partial) -> void {
    if (i == n) {
      covered += 1.0;
      res.visited += 1.0;
      if (partial < best_energy) {
        best_energy = partial;
        best = labels;
      }
      return;
    }
    for (std::size_t a = 0; a < graph.node(i).label_count(); ++a) {
      labels[i] = a;
      const double p = partial + increment(i);
      if (p > best_energy) {
        covered += suffix[i + 1];
        continue;
      }
      self(self, i + 1, p);
    }
  };
  search(search, 0, 0.0);
  if (covered != res.enumerated) throw InvariantViolation("oracle enumeration incomplete");

  res.best_labels = best;
  res.best_assignment = to_correspondences(graph, best);
  res.best_energy = total_energy(graph, std::span<const std::size_t>(best), lambda);
  return res;
}

/// Plain odometer enumeration without pruning, scoring every labeling
/// with total_energy(). Used to cross-check exhaustive_minimize().
inline OracleResult exhaustive_minimize_plain(const MatchGraph& graph, double lambda) {
  OracleResult res;
  res.enumerated = detail::state_space(graph);
  const std::size_t n = graph.size();
  if (n == 0) return res;

  std::vector<std::size_t> labels(n, 0);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    const EnergyBreakdown e = total_energy(graph, std::span<const std::size_t>(labels), lambda);
    res.visited += 1.0;
    if (e.combined < best) {
      best = e.combined;
      res.best_labels = labels;
      res.best_energy = e;
    }
    // last node varies fastest, giving lexicographic order
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++labels[i] < graph.node(i).label_count()) break;
      labels[i] = 0;
      if (i == 0) {
        res.best_assignment = to_correspondences(graph, res.best_labels);
        return res;
      }
    }
  }
}

}  // namespace mrfmatch
