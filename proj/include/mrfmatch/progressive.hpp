#pragma once

// Progressive matching.
//
// 1. Seeds: the reference features passing the NNDR test with the smallest
//    nearest-neighbor distance form an initial MRF (K-NN edges, full top-kappa
//    labels). BP + decode fixes their correspondences; features decoded
//    unmatched go back to the pool.
// 2. Rounds: every pooled feature is gated against its K nearest seeds. A
//    candidate survives when its pairwise energy against at least one of those
//    seed correspondences is below theta_seed. Features with a survivor become
//    extended nodes, linked to their K nearest nodes among seeds and extended
//    nodes. Seeds keep their single label and only emit messages. Extended
//    nodes decoded to a target join the seeds.
// 3. Stop when a round adds no seed.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mrfmatch/bp.hpp"
#include "mrfmatch/candidates.hpp"
#include "mrfmatch/core.hpp"
#include "mrfmatch/geometry.hpp"
#include "mrfmatch/graph.hpp"
#include "mrfmatch/spatial_index.hpp"

namespace mrfmatch {

struct SeedState {
  std::vector<std::size_t> seeds;    ///< reference indices, admission order
  std::vector<std::size_t> targets;  ///< fixed target of each seed
  std::vector<std::size_t> target_of;  ///< per reference feature; kUnmatched if not a seed
  std::size_t round = 0;

  explicit SeedState(std::size_t ref_count = 0) : target_of(ref_count, kUnmatched) {}

  std::size_t size() const noexcept { return seeds.size(); }
  bool empty() const noexcept { return seeds.empty(); }
  bool contains(std::size_t ref) const { return target_of[ref] != kUnmatched; }

  void add(std::size_t ref, std::size_t tgt) {
    if (tgt == kUnmatched) throw InvariantViolation("seed without a target");
    if (contains(ref)) throw InvariantViolation("feature is already a seed");
    seeds.push_back(ref);
    targets.push_back(tgt);
    target_of[ref] = tgt;
  }

  Correspondence correspondence(std::size_t k) const { return {seeds[k], targets[k]}; }
};

/// Labels a pooled feature keeps after gating.
struct GateResult {
  std::size_t feature = 0;
  std::vector<std::size_t> labels;   ///< surviving targets, then kUnmatched if enabled
  std::vector<double> min_energy;    ///< per surviving target: min e_psi over its seeds
};

struct ExpansionRecord {
  std::size_t round = 0;
  std::vector<std::size_t> added;                ///< nodes optimized this round
  std::vector<std::vector<std::size_t>> labels;  ///< label set of each added node
  std::size_t bp_iterations = 0;
  bool bp_converged = false;
  std::vector<double> bp_deltas;
  std::size_t matched = 0;
  std::size_t unmatched = 0;
};

struct MatchRecord {
  Correspondence match;
  double belief = 0.0;
  std::size_t round = 0;
};

struct MatchResult {
  std::vector<MatchRecord> matches;  ///< sorted by reference index
  std::vector<ExpansionRecord> rounds;

  std::vector<Correspondence> correspondences() const {
    std::vector<Correspondence> out;
    out.reserve(matches.size());
    for (const auto& m : matches) out.push_back(m.match);
    return out;
  }
};

/// Result of one progressive round.
struct RoundOutcome {
  ExpansionRecord record;
  SeedState state;
  std::vector<MatchRecord> new_matches;
};

/// Graph of one progressive round plus the mapping from graph nodes back to
/// the gate results they came from.
struct RoundGraph {
  MatchGraph graph;
  std::vector<std::size_t> extended_nodes;  ///< graph node of each gate result
};

class ProgressiveMatcher {
 public:
  /// Both feature sets must outlive the matcher.
  ProgressiveMatcher(const FeatureSet& ref, const FeatureSet& tgt, MatcherConfig config)
      : ref_(&ref), tgt_(&tgt), config_(std::move(config)) {
    if (ref.empty() || tgt.empty()) throw InputError("feature sets must be non-empty");
    if (ref.descriptor_len() != tgt.descriptor_len()) {
      throw InputError("descriptor length mismatch between feature sets");
    }
    candidates_ = top_kappa(ref, tgt, std::max<std::size_t>(config_.kappa(), 2));
    std::vector<Point> pts(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) pts[i] = ref.position(i);
    ref_index_ = SpatialIndex(std::move(pts));
  }

  const MatcherConfig& config() const noexcept { return config_; }
  const FeatureSet& reference() const noexcept { return *ref_; }
  const FeatureSet& target() const noexcept { return *tgt_; }
  std::span<const CandidateList> candidates() const noexcept { return candidates_; }

  /// Candidate labels of a feature before gating: top-kappa targets, then
  /// the unmatched label when enabled.
  std::vector<std::size_t> full_labels(std::size_t f) const {
    std::vector<std::size_t> labels;
    const auto& entries = candidates_[f].entries;
    const std::size_t k = std::min(config_.kappa(), entries.size());
    for (std::size_t i = 0; i < k; ++i) labels.push_back(entries[i].target);
    if (config_.unmatched_enabled()) labels.push_back(kUnmatched);
    return labels;
  }

  /// Reference features chosen as initial seed nodes, best first.
  std::vector<std::size_t> seed_features() const {
    std::vector<std::size_t> passing;
    for (std::size_t i = 0; i < candidates_.size(); ++i) {
      if (nndr_accepts(candidates_[i], config_.nndr_theta())) passing.push_back(i);
    }
    if (passing.size() < 2) {
      throw InsufficientSeeds("insufficient seeds: " + std::to_string(passing.size()) +
                              " features pass the NNDR filter");
    }
    std::stable_sort(passing.begin(), passing.end(), [&](std::size_t a, std::size_t b) {
      return candidates_[a].entries[0].distance < candidates_[b].entries[0].distance;
    });
    if (passing.size() > config_.seed_count()) passing.resize(config_.seed_count());
    return passing;
  }

  /// The initial MRF over the seed features; node i is seed_features()[i].
  MatchGraph select_seeds() const {
    const auto features = seed_features();
    MatchGraph graph(*ref_, *tgt_, config_.alpha());
    std::vector<Point> pts;
    pts.reserve(features.size());
    for (std::size_t f : features) {
      graph.add_node(f, full_labels(f));
      pts.push_back(ref_->position(f));
    }
    connect_knn(graph, SpatialIndex(std::move(pts)), features.size());
    return graph;
  }

  /// Seeds after BP on the initial graph, with the matching records.
  RoundOutcome initial_round() const {
    const MatchGraph graph = select_seeds();
    const BpResult bp = run_bp(graph, config_);
    const auto labels = decode_labels(graph, bp.beliefs);

    RoundOutcome out{{}, SeedState(ref_->size()), {}};
    out.record.round = 0;
    out.record.bp_iterations = bp.iterations;
    out.record.bp_converged = bp.converged;
    out.record.bp_deltas = bp.deltas;
    for (std::size_t i = 0; i < graph.size(); ++i) {
      const GraphNode& node = graph.node(i);
      out.record.added.push_back(node.ref);
      out.record.labels.push_back(node.targets);
      const std::size_t t = node.targets[labels[i]];
      if (t == kUnmatched) {
        ++out.record.unmatched;
        continue;
      }
      ++out.record.matched;
      out.state.add(node.ref, t);
      out.new_matches.push_back({{node.ref, t}, bp.beliefs[i][labels[i]], 0});
    }
    return out;
  }

  /// Spatial index over the seed positions, in SeedState order.
  SpatialIndex seed_index(const SeedState& seeds) const {
    std::vector<Point> pts;
    pts.reserve(seeds.size());
    for (std::size_t s : seeds.seeds) pts.push_back(ref_->position(s));
    return SpatialIndex(std::move(pts));
  }

  /// Gates the candidates of pooled feature f against its K nearest seeds.
  /// Returns nullopt when no candidate survives.
  std::optional<GateResult> consistency_gate(std::size_t f, const SeedState& seeds,
                                             const SpatialIndex& index) const {
    if (seeds.contains(f)) throw InvariantViolation("gating a seed feature");
    const auto near = index.query(ref_->position(f), config_.knn());
    GateResult gate{f, {}, {}};
    const auto& entries = candidates_[f].entries;
    const std::size_t k = std::min(config_.kappa(), entries.size());
    for (std::size_t c = 0; c < k; ++c) {
      const Correspondence cand{f, entries[c].target};
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t n : near) {
        best = std::min(best, pairwise_energy(*ref_, *tgt_, cand, seeds.correspondence(n)));
      }
      if (best < config_.theta_seed()) {
        gate.labels.push_back(cand.tgt);
        gate.min_energy.push_back(best);
      }
    }
    if (gate.labels.empty()) return std::nullopt;
    if (config_.unmatched_enabled()) gate.labels.push_back(kUnmatched);
    return gate;
  }

  std::optional<GateResult> consistency_gate(std::size_t f, const SeedState& seeds) const {
    return consistency_gate(f, seeds, seed_index(seeds));
  }

  /// Gates every feature outside the seed set.
  std::vector<GateResult> gate_pool(const SeedState& seeds) const {
    std::vector<GateResult> out;
    if (seeds.empty()) return out;
    const SpatialIndex index = seed_index(seeds);
    for (std::size_t f = 0; f < ref_->size(); ++f) {
      if (seeds.contains(f)) continue;
      if (auto g = consistency_gate(f, seeds, index)) out.push_back(std::move(*g));
    }
    return out;
  }

  /// MRF over the extended features and the seeds adjacent to them. Each
  /// extended node is linked to its K nearest nodes among seeds and
  /// extended features; seed-seed edges are omitted since seeds receive no
  /// messages.
  RoundGraph build_round_graph(const SeedState& seeds, std::span<const GateResult> gates) const {
    RoundGraph rg{MatchGraph(*ref_, *tgt_, config_.alpha()), {}};
    for (const auto& g : gates) rg.extended_nodes.push_back(rg.graph.add_node(g.feature, g.labels));

    // points: seeds first, then extended features
    std::vector<Point> pts;
    pts.reserve(seeds.size() + gates.size());
    for (std::size_t s : seeds.seeds) pts.push_back(ref_->position(s));
    for (const auto& g : gates) pts.push_back(ref_->position(g.feature));
    const SpatialIndex index(std::move(pts));

    std::vector<std::size_t> seed_node(seeds.size(), kUnmatched);
    auto node_of = [&](std::size_t p) {
      if (p >= seeds.size()) return rg.extended_nodes[p - seeds.size()];
      if (seed_node[p] == kUnmatched) {
        seed_node[p] = rg.graph.add_node(seeds.seeds[p], {seeds.targets[p]}, true);
      }
      return seed_node[p];
    };
    for (std::size_t q = 0; q < gates.size(); ++q) {
      const std::size_t p = seeds.size() + q;
      for (std::size_t n : index.query(index.point(p), config_.knn(), p)) {
        rg.graph.add_edge(rg.extended_nodes[q], node_of(n));
      }
    }
    return rg;
  }

  /// One gate / build / BP / decode round.
  RoundOutcome expand_round(const SeedState& seeds) const {
    RoundOutcome out{{}, seeds, {}};
    out.state.round = seeds.round + 1;
    out.record.round = out.state.round;
    if (seeds.empty()) return out;

    const auto gates = gate_pool(seeds);
    if (gates.empty()) return out;

    const RoundGraph rg = build_round_graph(seeds, gates);
    const BpResult bp = run_bp(rg.graph, config_);
    const auto labels = decode_labels(rg.graph, bp.beliefs);
    out.record.bp_iterations = bp.iterations;
    out.record.bp_converged = bp.converged;
    out.record.bp_deltas = bp.deltas;
    for (std::size_t q = 0; q < gates.size(); ++q) {
      const std::size_t node = rg.extended_nodes[q];
      out.record.added.push_back(gates[q].feature);
      out.record.labels.push_back(gates[q].labels);
      const std::size_t t = rg.graph.node(node).targets[labels[node]];
      if (t == kUnmatched) {
        ++out.record.unmatched;
        continue;
      }
      ++out.record.matched;
      out.state.add(gates[q].feature, t);
      out.new_matches.push_back(
          {{gates[q].feature, t}, bp.beliefs[node][labels[node]], out.state.round});
    }
    return out;
  }

  /// Full pipeline: initial seeds, then rounds until no feature is added.
  MatchResult run() const {
    MatchResult result;
    RoundOutcome initial = initial_round();
    result.rounds.push_back(std::move(initial.record));
    result.matches = std::move(initial.new_matches);
    SeedState state = std::move(initial.state);

    for (std::size_t guard = 0; guard <= ref_->size() && !state.empty(); ++guard) {
      RoundOutcome next = expand_round(state);
      const bool grew = next.record.matched > 0;
      result.rounds.push_back(std::move(next.record));
      if (!grew) break;
      result.matches.insert(result.matches.end(), next.new_matches.begin(),
                            next.new_matches.end());
      state = std::move(next.state);
    }
    std::sort(result.matches.begin(), result.matches.end(),
              [](const MatchRecord& a, const MatchRecord& b) { return a.match.ref < b.match.ref; });
    return result;
  }

 private:
  // Links node i to the K nearest other points of the index, where index
  // point i is graph node i.
  void connect_knn(MatchGraph& graph, const SpatialIndex& index, std::size_t n) const {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j : knn_neighbors(index, i, config_.knn())) graph.add_edge(i, j);
    }
  }

  const FeatureSet* ref_;
  const FeatureSet* tgt_;
  MatcherConfig config_;
  std::vector<CandidateList> candidates_;
  SpatialIndex ref_index_;

  friend MatchResult match_non_progressive(const FeatureSet&, const FeatureSet&,
                                           const MatcherConfig&);
};

inline MatchResult match(const FeatureSet& ref, const FeatureSet& tgt, const MatcherConfig& config) {
  return ProgressiveMatcher(ref, tgt, config).run();
}

/// Single MRF over every reference feature with full top-kappa labels and
/// K-NN edges, solved by plain BP. The ablation counterpart of match().
inline MatchResult match_non_progressive(const FeatureSet& ref, const FeatureSet& tgt,
                                         const MatcherConfig& config) {
  const ProgressiveMatcher m(ref, tgt, config);
  MatchGraph graph(ref, tgt, config.alpha());
  for (std::size_t f = 0; f < ref.size(); ++f) graph.add_node(f, m.full_labels(f));
  m.connect_knn(graph, m.ref_index_, ref.size());

  const BpResult bp = run_bp(graph, config);
  const auto labels = decode_labels(graph, bp.beliefs);
  MatchResult result;
  ExpansionRecord rec;
  rec.bp_iterations = bp.iterations;
  rec.bp_converged = bp.converged;
  rec.bp_deltas = bp.deltas;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const std::size_t t = graph.node(i).targets[labels[i]];
    rec.added.push_back(i);
    rec.labels.push_back(graph.node(i).targets);
    if (t == kUnmatched) {
      ++rec.unmatched;
      continue;
    }
    ++rec.matched;
    result.matches.push_back({{i, t}, bp.beliefs[i][labels[i]], 0});
  }
  result.rounds.push_back(std::move(rec));
  return result;
}

}  // namespace mrfmatch
