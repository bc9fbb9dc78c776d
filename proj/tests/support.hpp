#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "mrfmatch/mrfmatch.hpp"

namespace testing_support {

using namespace mrfmatch;

inline constexpr double kPi = std::numbers::pi;

inline Feature feature(double x, double y, double scale, double angle,
                       std::vector<double> descriptor = {1.0, 0.0, 0.0, 0.0}) {
  return Feature{x, y, scale, angle, std::move(descriptor)};
}

inline std::vector<double> basis(std::size_t dim, std::size_t k) {
  std::vector<double> v(dim, 0.0);
  v[k] = 1.0;
  return v;
}

inline FeatureSet make_set(std::vector<Feature> fs, double w = 1000.0, double h = 1000.0) {
  return FeatureSet(w, h, std::move(fs));
}

// Independent transfer distance: pose matrices built from raw feature fields
// and inverted with a general 3x3 inverse.
inline Eigen::Matrix3d pose_matrix(const Feature& f) {
  Eigen::Matrix3d m;
  const double c = f.scale * std::cos(f.orientation), s = f.scale * std::sin(f.orientation);
  m << c, -s, f.x, s, c, f.y, 0, 0, 1;
  return m;
}

inline double ref_transfer(const Feature& s, const Feature& t, const Feature& s2,
                           const Feature& t2) {
  const Eigen::Vector3d p = pose_matrix(t) * pose_matrix(s).inverse() * Eigen::Vector3d(s2.x, s2.y, 1);
  return (p.head<2>() / p.z() - Eigen::Vector2d(t2.x, t2.y)).squaredNorm();
}

inline double ref_pairwise(const FeatureSet& ref, const FeatureSet& tgt, Correspondence c,
                           Correspondence c2) {
  if (!c.matched() || !c2.matched()) return 0.0;
  const Feature &s = ref[c.ref], &t = tgt[c.tgt], &s2 = ref[c2.ref], &t2 = tgt[c2.tgt];
  return ref_transfer(s, t, s2, t2) + ref_transfer(s2, t2, s, t) + ref_transfer(t, s, t2, s2) +
         ref_transfer(t2, s2, t, s);
}

inline double ref_unary(const FeatureSet& ref, const FeatureSet& tgt, Correspondence c,
                        double alpha) {
  if (!c.matched()) return alpha;
  double d = 0.0;
  for (std::size_t k = 0; k < ref.descriptor_len(); ++k) {
    const double diff = ref.descriptor(c.ref)[k] - tgt.descriptor(c.tgt)[k];
    d += diff * diff;
  }
  return std::sqrt(d);
}

/// Random features with positions in [0, extent) and random descriptors.
inline FeatureSet random_set(std::mt19937_64& rng, std::size_t n, double extent = 500.0,
                             std::size_t dim = 8) {
  std::uniform_real_distribution<double> pos(0.0, extent), ang(-kPi, kPi), ls(-1.0, 1.0);
  std::normal_distribution<double> g;
  std::vector<Feature> fs(n);
  for (auto& f : fs) {
    f = feature(pos(rng), pos(rng), std::exp(ls(rng)), ang(rng), std::vector<double>(dim));
    for (double& v : f.descriptor) v = g(rng);
  }
  return FeatureSet(extent, extent, std::move(fs));
}

// ---------------------------------------------------------------------------
// Scene definitions shared by unit and acceptance tests

inline SceneSpec planted_spec(std::uint64_t seed = 1) {
  SceneSpec s;
  s.n_features = 500;
  s.warp = similarity_warp(s.width, s.height, 30.0 * kPi / 180.0, 1.2, 10.0, -5.0);
  s.unpaired_fraction = 0.2;
  s.repetition_groups = 10;
  s.rng_seed = seed;
  return s;
}

/// Repetitive-pattern suite with moderate noise: 4 deformation levels of 5
/// scenes. Noise is sub-pixel in position and a few thousandths in scale
/// and orientation; descriptor noise grows with the level.
struct SuiteScene {
  std::string level;
  SceneSpec spec;
};

inline std::vector<SuiteScene> ablation_suite() {
  std::vector<SuiteScene> out;
  for (int level = 0; level < 4; ++level) {
    for (int k = 0; k < 5; ++k) {
      SceneSpec s;
      s.n_features = 500;
      const double angle = (10.0 + 10.0 * level + 2.0 * k) * kPi / 180.0;
      const double scale = 1.0 + 0.1 * level + 0.02 * k;
      s.warp = similarity_warp(s.width, s.height, angle, scale, 4.0 * k, -3.0 * k);
      s.position_noise_sigma = 0.1;
      s.scale_noise_sigma = 0.002;
      s.orientation_noise_sigma = 0.002;
      s.descriptor_noise_sigma = 0.03 * (1.0 + 0.1 * level);
      s.unpaired_fraction = 0.3;
      s.repetition_groups = 20;
      s.repeated_fraction = 0.6;
      s.rng_seed = 1000 + 10 * static_cast<std::uint64_t>(level) + static_cast<std::uint64_t>(k);
      out.push_back({"L" + std::to_string(level + 1), s});
    }
  }
  return out;
}

inline SceneSpec unpaired_spec(std::uint64_t seed) {
  SceneSpec s;
  s.n_features = 500;
  s.warp = similarity_warp(s.width, s.height, 20.0 * kPi / 180.0, 1.1);
  s.unpaired_fraction = 0.5;
  s.repetition_groups = 10;
  s.descriptor_noise_sigma = 0.02;
  s.position_noise_sigma = 0.1;
  s.scale_noise_sigma = 0.002;
  s.orientation_noise_sigma = 0.002;
  s.rng_seed = seed;
  return s;
}

/// Left half moves +shift px horizontally, right half moves -shift px.
inline std::pair<SceneSpec, SceneSpec> two_motion_specs(std::uint64_t seed, double shift = 50.0) {
  SceneSpec a;
  a.n_features = 250;
  a.descriptor_noise_sigma = 0.02;
  a.unpaired_fraction = 0.1;
  a.region = Region{0.0, 0.0, a.width / 2, a.height};
  a.warp = similarity_warp(a.width, a.height, 0.0, 1.0, shift, 0.0);
  a.rng_seed = seed;
  SceneSpec b = a;
  b.region = Region{a.width / 2, 0.0, a.width, a.height};
  b.warp = similarity_warp(a.width, a.height, 0.0, 1.0, -shift, 0.0);
  b.rng_seed = seed + 7919;
  return {a, b};
}

/// Fraction of planted pairs present in `matches`.
inline double recovery(const std::vector<Correspondence>& matches, const GroundTruth& gt,
                       std::size_t ref_count) {
  if (gt.pairs.empty()) return 0.0;
  const auto want = gt.target_of(ref_count);
  std::size_t hit = 0;
  for (const auto& c : matches) {
    if (c.matched() && want[c.ref] == c.tgt) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(gt.pairs.size());
}

}  // namespace testing_support
