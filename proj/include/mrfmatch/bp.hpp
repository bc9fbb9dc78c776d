#pragma once

// Min-sum belief propagation on a MatchGraph.
//
//   m_{i->j}(c_j) = min_{c_i} [ e_phi(c_i) + lambda e_psi(c_i, c_j)
//                               + sum_{k in N(i) \ j} m_{k->i}(c_i) ]
//   b(c_i)        = e_phi(c_i) + sum_{k in N(i)} m_{k->i}(c_i)
//
// Synchronous flooding schedule from all-zero messages. Fixed (seed) nodes
// never receive messages, so only messages toward free nodes are stored.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "mrfmatch/core.hpp"
#include "mrfmatch/graph.hpp"

namespace mrfmatch {

/// total_energy sums every edge twice (once from each endpoint) while a BP
/// message weights each edge once. BP run with `message_lambda` minimizes
/// total_energy evaluated at this lambda.
inline constexpr double energy_lambda(double message_lambda) noexcept {
  return message_lambda / 2.0;
}

struct BpOptions {
  /// Subtract each message's minimum after every update.
  bool normalize = true;
};

struct BpResult {
  /// One belief per label for every node; fixed nodes carry their unary.
  std::vector<std::vector<double>> beliefs;
  std::size_t iterations = 0;
  bool converged = false;
  /// Max absolute change of the min-normalized messages, per iteration.
  std::vector<double> deltas;
};

namespace detail {

class MessageStore {
 public:
  explicit MessageStore(const MatchGraph& g) : offset_(2 * g.edges().size() + 1, 0) {
    const auto edges = g.edges();
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const GraphNode& u = g.node(edges[e].u);
      const GraphNode& v = g.node(edges[e].v);
      offset_[2 * e + 1] = offset_[2 * e] + (v.fixed ? 0 : v.label_count());
      offset_[2 * e + 2] = offset_[2 * e + 1] + (u.fixed ? 0 : u.label_count());
    }
  }

  std::size_t total() const noexcept { return offset_.back(); }

  // Directed message id along `edge` out of node `from`.
  static std::size_t id(const MatchGraph& g, std::size_t edge, std::size_t from) {
    return 2 * edge + (g.edge(edge).u == from ? 0 : 1);
  }

  std::size_t begin(std::size_t id) const { return offset_[id]; }
  std::size_t size(std::size_t id) const { return offset_[id + 1] - offset_[id]; }

 private:
  std::vector<std::size_t> offset_;
};

}  // namespace detail

inline BpResult run_bp(const MatchGraph& graph, const MatcherConfig& config,
                       const BpOptions& options = {}) {
  const double lambda = config.lambda();
  const detail::MessageStore store(graph);
  std::vector<double> old_msg(store.total(), 0.0);
  std::vector<double> new_msg(store.total(), 0.0);
  std::vector<double> h;

  BpResult result;
  const auto edges = graph.edges();

  auto message_min = [](const double* m, std::size_t n) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) lo = std::min(lo, m[i]);
    return lo;
  };

  for (std::size_t iter = 1; iter <= config.bp_max_iters(); ++iter) {
    double delta = 0.0;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      for (int dir = 0; dir < 2; ++dir) {
        const std::size_t from = dir == 0 ? edges[e].u : edges[e].v;
        const std::size_t to = dir == 0 ? edges[e].v : edges[e].u;
        const std::size_t id = 2 * e + static_cast<std::size_t>(dir);
        const std::size_t n_to = store.size(id);
        if (n_to == 0) continue;

        const GraphNode& src = graph.node(from);
        h.assign(src.unary.begin(), src.unary.end());
        for (const Adjacent& k : graph.neighbors(from)) {
          if (k.node == to) continue;
          const std::size_t in = detail::MessageStore::id(graph, k.edge, k.node);
          if (store.size(in) == 0) continue;
          const double* m = old_msg.data() + store.begin(in);
          for (std::size_t a = 0; a < h.size(); ++a) h[a] += m[a];
        }

        // pairwise table is [u label][v label]; walk it with strides
        const double* table = edges[e].pairwise.data();
        const std::size_t stride_a = dir == 0 ? n_to : 1;
        const std::size_t stride_b = dir == 0 ? 1 : h.size();
        double* out = new_msg.data() + store.begin(id);
        for (std::size_t b = 0; b < n_to; ++b) {
          double best = std::numeric_limits<double>::infinity();
          for (std::size_t a = 0; a < h.size(); ++a) {
            best = std::min(best, h[a] + lambda * table[a * stride_a + b * stride_b]);
          }
          out[b] = best;
        }
        const double lo_new = message_min(out, n_to);
        if (options.normalize) {
          for (std::size_t b = 0; b < n_to; ++b) out[b] -= lo_new;
        }
        const double* prev = old_msg.data() + store.begin(id);
        const double lo_old = message_min(prev, n_to);
        const double shift_new = options.normalize ? 0.0 : lo_new;
        for (std::size_t b = 0; b < n_to; ++b) {
          delta = std::max(delta, std::abs((out[b] - shift_new) - (prev[b] - lo_old)));
        }
      }
    }
    old_msg.swap(new_msg);
    result.iterations = iter;
    result.deltas.push_back(delta);
    if (delta < config.bp_epsilon()) {
      result.converged = true;
      break;
    }
  }

  result.beliefs.resize(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const GraphNode& node = graph.node(i);
    auto& b = result.beliefs[i];
    b.assign(node.unary.begin(), node.unary.end());
    if (node.fixed) continue;
    for (const Adjacent& k : graph.neighbors(i)) {
      const std::size_t in = detail::MessageStore::id(graph, k.edge, k.node);
      const double* m = old_msg.data() + store.begin(in);
      for (std::size_t a = 0; a < b.size(); ++a) b[a] += m[a];
    }
  }
  return result;
}

/// Per-node argmin of the beliefs. Ties go to the lower target index, with
/// the unmatched label losing every tie.
inline std::vector<std::size_t> decode_labels(const MatchGraph& graph,
                                              std::span<const std::vector<double>> beliefs) {
  if (beliefs.size() != graph.size()) throw InputError("belief table does not match graph");
  std::vector<std::size_t> labels(graph.size(), 0);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto& targets = graph.node(i).targets;
    const auto& b = beliefs[i];
    std::size_t best = 0;
    for (std::size_t a = 1; a < b.size(); ++a) {
      if (b[a] < b[best] || (b[a] == b[best] && targets[a] < targets[best])) best = a;
    }
    labels[i] = best;
  }
  return labels;
}

inline std::vector<Correspondence> decode(const MatchGraph& graph,
                                          std::span<const std::vector<double>> beliefs) {
  const auto labels = decode_labels(graph, beliefs);
  return to_correspondences(graph, labels);
}

}  // namespace mrfmatch
