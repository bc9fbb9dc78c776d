#pragma once

// The matching MRF: one node per selected reference feature, a label per
// candidate target (plus the unmatched label), undirected edges between
// spatial neighbors, and the energy of a labeling.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mrfmatch/candidates.hpp"
#include "mrfmatch/core.hpp"
#include "mrfmatch/geometry.hpp"

namespace mrfmatch {

/// Unary cost: descriptor distance of a matched pair, alpha otherwise.
inline double unary_energy(const FeatureSet& ref, const FeatureSet& tgt,
                           const Correspondence& c, double alpha) {
  if (!c.matched()) return alpha;
  return descriptor_distance(ref.descriptor(c.ref), tgt.descriptor(c.tgt));
}

struct GraphNode {
  std::size_t ref = 0;
  std::vector<std::size_t> targets;  ///< label set; may contain kUnmatched
  std::vector<double> unary;         ///< one per label
  bool fixed = false;                ///< seed: emits messages, never receives

  std::size_t label_count() const noexcept { return targets.size(); }
};

struct GraphEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  /// e_psi for every label pair, row-major [label of u][label of v].
  std::vector<double> pairwise;
};

struct Adjacent {
  std::size_t node;
  std::size_t edge;
};

struct EnergyBreakdown {
  double unary_total = 0.0;
  double pairwise_total = 0.0;  ///< squared pixels, before weighting
  double combined = 0.0;        ///< unary_total + lambda * pairwise_total
};

/// The graph keeps non-owning references to both feature sets; they must
/// outlive it. Nodes and edges are append-only.
class MatchGraph {
 public:
  MatchGraph(const FeatureSet& ref, const FeatureSet& tgt, double alpha)
      : ref_(&ref), tgt_(&tgt), alpha_(alpha) {}

  const FeatureSet& reference() const noexcept { return *ref_; }
  const FeatureSet& target() const noexcept { return *tgt_; }
  double alpha() const noexcept { return alpha_; }

  std::size_t add_node(std::size_t ref_index, std::vector<std::size_t> targets,
                       bool fixed = false) {
    if (ref_index >= ref_->size()) throw InputError("node reference index out of range");
    if (targets.empty()) throw InvariantViolation("node needs at least one label");
    if (fixed && targets.size() != 1) throw InvariantViolation("fixed node needs exactly one label");
    GraphNode node{ref_index, std::move(targets), {}, fixed};
    node.unary.reserve(node.targets.size());
    for (std::size_t i = 0; i < node.targets.size(); ++i) {
      const std::size_t t = node.targets[i];
      if (t != kUnmatched && t >= tgt_->size()) throw InputError("label target out of range");
      for (std::size_t j = 0; j < i; ++j) {
        if (node.targets[j] == t) throw InvariantViolation("duplicate label");
      }
      node.unary.push_back(unary_energy(*ref_, *tgt_, {ref_index, t}, alpha_));
    }
    nodes_.push_back(std::move(node));
    adjacency_.emplace_back();
    return nodes_.size() - 1;
  }

  /// Adds the undirected edge {u, v}. Returns false for self-loops and
  /// duplicates, which are ignored.
  bool add_edge(std::size_t u, std::size_t v) {
    if (u >= nodes_.size() || v >= nodes_.size()) throw InvariantViolation("edge node out of range");
    if (u == v || has_edge(u, v)) return false;
    GraphEdge e{u, v, {}};
    const GraphNode& a = nodes_[u];
    const GraphNode& b = nodes_[v];
    e.pairwise.resize(a.label_count() * b.label_count());
    for (std::size_t i = 0; i < a.label_count(); ++i) {
      for (std::size_t j = 0; j < b.label_count(); ++j) {
        e.pairwise[i * b.label_count() + j] = pairwise_energy(
            *ref_, *tgt_, {a.ref, a.targets[i]}, {b.ref, b.targets[j]});
      }
    }
    const std::size_t id = edges_.size();
    edges_.push_back(std::move(e));
    adjacency_[u].push_back({v, id});
    adjacency_[v].push_back({u, id});
    return true;
  }

  bool has_edge(std::size_t u, std::size_t v) const {
    const auto& adj = adjacency_[u];
    return std::any_of(adj.begin(), adj.end(), [v](const Adjacent& a) { return a.node == v; });
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  const GraphNode& node(std::size_t i) const { return nodes_[i]; }
  std::span<const GraphNode> nodes() const noexcept { return nodes_; }
  std::span<const GraphEdge> edges() const noexcept { return edges_; }
  const GraphEdge& edge(std::size_t e) const { return edges_[e]; }
  std::span<const Adjacent> neighbors(std::size_t i) const { return adjacency_[i]; }

  /// e_psi between label a of node `from` and label b of node `to`, where
  /// `edge` joins the two.
  double pairwise(std::size_t edge, std::size_t from, std::size_t a, std::size_t b) const {
    const GraphEdge& e = edges_[edge];
    if (e.u == from) return e.pairwise[a * nodes_[e.v].label_count() + b];
    return e.pairwise[b * nodes_[e.v].label_count() + a];
  }

  /// Index of `target` in the node's label list, or label_count() if absent.
  std::size_t label_index(std::size_t node, std::size_t target) const {
    const auto& t = nodes_[node].targets;
    return static_cast<std::size_t>(std::find(t.begin(), t.end(), target) - t.begin());
  }

 private:
  const FeatureSet* ref_;
  const FeatureSet* tgt_;
  double alpha_;
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::vector<std::vector<Adjacent>> adjacency_;
};

/// Energy of a labeling given as one label index per node. The pairwise
/// total runs over ordered neighbor pairs, so each edge counts twice.
inline EnergyBreakdown total_energy(const MatchGraph& graph, std::span<const std::size_t> labels,
                                    double lambda) {
  if (labels.size() != graph.size()) throw InputError("assignment size does not match graph");
  EnergyBreakdown e;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (labels[i] >= graph.node(i).label_count()) throw InputError("label not in node's list");
    e.unary_total += graph.node(i).unary[labels[i]];
  }
  for (std::size_t i = 0; i < graph.size(); ++i) {
    for (const Adjacent& n : graph.neighbors(i)) {
      e.pairwise_total += graph.pairwise(n.edge, i, labels[i], labels[n.node]);
    }
  }
  e.combined = e.unary_total + lambda * e.pairwise_total;
  return e;
}

/// Label indices of an assignment expressed as correspondences.
inline std::vector<std::size_t> label_indices(const MatchGraph& graph,
                                              std::span<const Correspondence> assignment) {
  if (assignment.size() != graph.size()) throw InputError("assignment size does not match graph");
  std::vector<std::size_t> labels(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (assignment[i].ref != graph.node(i).ref) {
      throw InputError("assignment node " + std::to_string(i) + " names the wrong reference feature");
    }
    labels[i] = graph.label_index(i, assignment[i].tgt);
    if (labels[i] >= graph.node(i).label_count()) {
      throw InputError("label not in node " + std::to_string(i) + "'s list");
    }
  }
  return labels;
}

inline EnergyBreakdown total_energy(const MatchGraph& graph,
                                    std::span<const Correspondence> assignment, double lambda) {
  const auto labels = label_indices(graph, assignment);
  return total_energy(graph, std::span<const std::size_t>(labels), lambda);
}

inline std::vector<Correspondence> to_correspondences(const MatchGraph& graph,
                                                      std::span<const std::size_t> labels) {
  std::vector<Correspondence> out(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    out[i] = {graph.node(i).ref, graph.node(i).targets[labels[i]]};
  }
  return out;
}

}  // namespace mrfmatch
