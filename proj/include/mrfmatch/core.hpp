#pragma once

// Domain types shared by every stage of the matcher: features, feature sets,
// correspondences, the matcher configuration and the error hierarchy.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mrfmatch/transform.hpp"

namespace mrfmatch {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input. Carries the offending feature index when
/// the failure can be pinned to one record.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what,
                      std::optional<std::size_t> feature = std::nullopt)
      : Error(feature ? what + " (feature " + std::to_string(*feature) + ")"
                      : what),
        feature_(feature) {}

  std::optional<std::size_t> feature_index() const noexcept { return feature_; }

 private:
  std::optional<std::size_t> feature_;
};

/// Too few reference features pass the seed filter to build an initial MRF.
class InsufficientSeeds : public Error {
 public:
  using Error::Error;
};

/// An internal consistency check failed.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Angles

/// Wraps an angle in radians into [-pi, pi).
inline double wrap_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = radians - two_pi * std::floor((radians + std::numbers::pi) / two_pi);
  if (r >= std::numbers::pi) r -= two_pi;
  if (r < -std::numbers::pi) r = -std::numbers::pi;
  return r;
}

// ---------------------------------------------------------------------------
// Features

struct Feature {
  double x = 0.0;
  double y = 0.0;
  double scale = 1.0;
  double orientation = 0.0;
  std::vector<double> descriptor;

  Point position() const noexcept { return {x, y}; }
};

struct IngestOptions {
  /// Accept positions outside [0, width) x [0, height).
  bool allow_border_overshoot = false;
};

/// An immutable, validated set of features detected in one image.
///
/// Construction normalizes every descriptor to unit L2 norm, wraps
/// orientations into [-pi, pi) and caches the similarity pose of each
/// feature together with its closed-form inverse.
class FeatureSet {
 public:
  FeatureSet() = default;

  FeatureSet(double width, double height, std::vector<Feature> features,
             IngestOptions options = {})
      : width_(width), height_(height), features_(std::move(features)) {
    if (!(std::isfinite(width_) && width_ > 0.0 && std::isfinite(height_) &&
          height_ > 0.0)) {
      throw InputError("image size must be positive");
    }
    std::size_t dim = 0;
    poses_.reserve(features_.size());
    inverses_.reserve(features_.size());
    for (std::size_t i = 0; i < features_.size(); ++i) {
      Feature& f = features_[i];
      if (!std::isfinite(f.x) || !std::isfinite(f.y)) {
        throw InputError("non-finite position", i);
      }
      if (!(std::isfinite(f.scale) && f.scale > 0.0)) {
        throw InputError("scale must be positive", i);
      }
      if (!std::isfinite(f.orientation)) {
        throw InputError("non-finite orientation", i);
      }
      if (!options.allow_border_overshoot &&
          (f.x < 0.0 || f.x >= width_ || f.y < 0.0 || f.y >= height_)) {
        throw InputError("position outside the image", i);
      }
      if (f.descriptor.empty()) throw InputError("empty descriptor", i);
      if (i == 0) dim = f.descriptor.size();
      if (f.descriptor.size() != dim) {
        throw InputError("inconsistent descriptor length", i);
      }
      double norm2 = 0.0;
      for (double v : f.descriptor) {
        if (!std::isfinite(v)) throw InputError("non-finite descriptor", i);
        norm2 += v * v;
      }
      if (norm2 <= 0.0) throw InputError("zero descriptor", i);
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& v : f.descriptor) v *= inv;

      f.orientation = wrap_angle(f.orientation);
      poses_.push_back(SimilarityTransform::from_pose(f.x, f.y, f.scale, f.orientation));
      inverses_.push_back(poses_.back().inverse());
    }
    descriptor_len_ = dim;
  }

  double width() const noexcept { return width_; }
  double height() const noexcept { return height_; }
  std::size_t size() const noexcept { return features_.size(); }
  bool empty() const noexcept { return features_.empty(); }
  std::size_t descriptor_len() const noexcept { return descriptor_len_; }

  const Feature& operator[](std::size_t i) const { return features_[i]; }
  const Feature& at(std::size_t i) const { return features_.at(i); }
  std::span<const Feature> features() const noexcept { return features_; }

  Point position(std::size_t i) const { return features_[i].position(); }
  std::span<const double> descriptor(std::size_t i) const {
    return features_[i].descriptor;
  }
  const SimilarityTransform& pose(std::size_t i) const { return poses_[i]; }
  const SimilarityTransform& inverse_pose(std::size_t i) const { return inverses_[i]; }

 private:
  double width_ = 1.0;
  double height_ = 1.0;
  std::size_t descriptor_len_ = 0;
  std::vector<Feature> features_;
  std::vector<SimilarityTransform> poses_;
  std::vector<SimilarityTransform> inverses_;
};

// ---------------------------------------------------------------------------
// Correspondences

/// Target value of a reference feature that has no counterpart.
inline constexpr std::size_t kUnmatched = std::numeric_limits<std::size_t>::max();

struct Correspondence {
  std::size_t ref = 0;
  std::size_t tgt = kUnmatched;

  bool matched() const noexcept { return tgt != kUnmatched; }
  Correspondence inverse() const noexcept { return {tgt, ref}; }

  friend bool operator==(const Correspondence&, const Correspondence&) = default;
  friend auto operator<=>(const Correspondence&, const Correspondence&) = default;
};

// ---------------------------------------------------------------------------
// Configuration

/// Raw matcher parameters. Turned into a MatcherConfig, which validates them.
struct MatcherParams {
  double lambda = 0.1;       ///< weight of the pairwise term
  std::size_t kappa = 15;    ///< descriptor candidates per feature
  double alpha = 0.5;        ///< unary cost of the unmatched label; +inf disables it
  double nndr_theta = 0.9;   ///< ratio threshold for seed eligibility
  std::size_t seed_count = 100;
  std::size_t knn = 5;
  double theta_seed = 80.0;  ///< squared pixels
  std::size_t bp_max_iters = 100;
  double bp_epsilon = 1e-6;
  std::uint64_t rng_seed = 0;
};

class MatcherConfig {
 public:
  MatcherConfig() : MatcherConfig(MatcherParams{}) {}

  explicit MatcherConfig(const MatcherParams& p) : p_(p) {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw InputError(std::string("invalid config: ") + what);
    };
    require(std::isfinite(p.lambda) && p.lambda >= 0.0, "lambda must be >= 0");
    require(p.kappa >= 1, "kappa must be >= 1");
    require(!std::isnan(p.alpha) && p.alpha >= 0.0, "alpha must be >= 0");
    require(std::isfinite(p.nndr_theta) && p.nndr_theta > 0.0 && p.nndr_theta <= 1.0,
            "nndr_theta must be in (0, 1]");
    require(p.seed_count >= 1, "seed_count must be >= 1");
    require(p.knn >= 1, "knn must be >= 1");
    require(std::isfinite(p.theta_seed) && p.theta_seed >= 0.0, "theta_seed must be >= 0");
    require(p.bp_max_iters >= 1, "bp_max_iters must be >= 1");
    require(std::isfinite(p.bp_epsilon) && p.bp_epsilon >= 0.0, "bp_epsilon must be >= 0");
  }

  const MatcherParams& params() const noexcept { return p_; }

  double lambda() const noexcept { return p_.lambda; }
  std::size_t kappa() const noexcept { return p_.kappa; }
  double alpha() const noexcept { return p_.alpha; }
  double nndr_theta() const noexcept { return p_.nndr_theta; }
  std::size_t seed_count() const noexcept { return p_.seed_count; }
  std::size_t knn() const noexcept { return p_.knn; }
  double theta_seed() const noexcept { return p_.theta_seed; }
  std::size_t bp_max_iters() const noexcept { return p_.bp_max_iters; }
  double bp_epsilon() const noexcept { return p_.bp_epsilon; }
  std::uint64_t rng_seed() const noexcept { return p_.rng_seed; }

  /// False when alpha is infinite, i.e. the unmatched label is switched off.
  bool unmatched_enabled() const noexcept { return std::isfinite(p_.alpha); }

  MatcherConfig with(auto&& edit) const {
    MatcherParams p = p_;
    edit(p);
    return MatcherConfig(p);
  }

 private:
  MatcherParams p_;
};

inline MatcherConfig default_config() { return MatcherConfig(MatcherParams{}); }

}  // namespace mrfmatch
