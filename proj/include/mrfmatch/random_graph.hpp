#pragma once

// Random small MRF instances for checking inference against the oracle.

#include <algorithm>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include "mrfmatch/core.hpp"
#include "mrfmatch/graph.hpp"

namespace mrfmatch {

struct RandomGraphOptions {
  std::size_t min_nodes = 1;
  std::size_t max_nodes = 10;
  std::size_t max_labels = 5;  ///< including the unmatched label
  std::size_t target_count = 12;
  std::size_t descriptor_len = 8;
  /// Side of the square holding all feature positions, in pixels. Small
  /// spreads keep pairwise and unary terms on comparable scales.
  double spread = 6.0;
  double alpha = 0.5;
  double unmatched_probability = 0.7;
  /// Extra random edges on top of the spanning tree; 0 gives a tree.
  std::size_t extra_edges = 0;
};

struct RandomProblem {
  std::shared_ptr<const FeatureSet> ref;
  std::shared_ptr<const FeatureSet> tgt;
  MatchGraph graph;
};

inline FeatureSet random_feature_set(std::mt19937_64& rng, std::size_t count, std::size_t dim,
                                     double spread) {
  std::uniform_real_distribution<double> pos(0.0, spread);
  std::uniform_real_distribution<double> log_scale(-0.7, 0.7);
  std::uniform_real_distribution<double> angle(-3.14159, 3.14159);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Feature> fs(count);
  for (auto& f : fs) {
    f.x = pos(rng);
    f.y = pos(rng);
    f.scale = std::exp(log_scale(rng));
    f.orientation = angle(rng);
    f.descriptor.resize(dim);
    for (double& v : f.descriptor) v = gauss(rng);
  }
  return FeatureSet(spread, spread, std::move(fs));
}

inline RandomProblem random_problem(std::mt19937_64& rng, const RandomGraphOptions& opt = {}) {
  std::uniform_int_distribution<std::size_t> node_count(opt.min_nodes, opt.max_nodes);
  const std::size_t n = node_count(rng);
  auto ref = std::make_shared<const FeatureSet>(
      random_feature_set(rng, n, opt.descriptor_len, opt.spread));
  auto tgt = std::make_shared<const FeatureSet>(
      random_feature_set(rng, opt.target_count, opt.descriptor_len, opt.spread));
  RandomProblem p{ref, tgt, MatchGraph(*ref, *tgt, opt.alpha)};

  std::vector<std::size_t> pool(opt.target_count);
  std::iota(pool.begin(), pool.end(), 0);
  std::uniform_int_distribution<std::size_t> label_count(1, opt.max_labels);
  std::bernoulli_distribution with_unmatched(opt.unmatched_probability);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t count = label_count(rng);
    std::vector<std::size_t> targets;
    const bool unmatched = with_unmatched(rng);
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t matched = std::min(unmatched ? count - 1 : count, pool.size());
    targets.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(matched));
    if (unmatched || targets.empty()) targets.push_back(kUnmatched);
    p.graph.add_node(i, std::move(targets));
  }
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> parent(0, i - 1);
    p.graph.add_edge(i, parent(rng));
  }
  if (n > 2) {
    std::uniform_int_distribution<std::size_t> any(0, n - 1);
    for (std::size_t e = 0; e < opt.extra_edges; ++e) p.graph.add_edge(any(rng), any(rng));
  }
  return p;
}

}  // namespace mrfmatch
