#pragma once

// Synthetic scene pairs with planted ground truth.
//
// Reference features are sampled uniformly; paired ones are placed so their
// warped image lands inside the target frame. Target features are warped
// copies (position through the warp, scale and orientation through its local
// similarity approximation) with optional noise, followed by unpaired
// clutter. Target order follows reference order, so an identity warp without
// noise or clutter reproduces the reference set with pairs (i, i).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "mrfmatch/core.hpp"
#include "mrfmatch/transform.hpp"

namespace mrfmatch {

/// Axis-aligned sampling window in reference pixels.
struct Region {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;
};

struct SceneSpec {
  std::size_t n_features = 500;
  double width = 640.0;
  double height = 480.0;
  Homography warp;
  std::size_t descriptor_len = 128;
  double descriptor_noise_sigma = 0.0;  ///< per-component, before renormalization
  double position_noise_sigma = 0.0;    ///< pixels, clipped at 3 sigma
  double scale_noise_sigma = 0.0;       ///< relative
  double orientation_noise_sigma = 0.0; ///< radians
  double unpaired_fraction = 0.0;       ///< on each side
  std::size_t repetition_groups = 0;
  /// Share of reference features spread over the repetition groups.
  double repeated_fraction = 0.3;
  /// Where reference features are sampled; whole image when unset.
  std::optional<Region> region;
  std::uint64_t rng_seed = 1;

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw InputError(std::string("invalid scene spec: ") + what);
    };
    require(std::isfinite(width) && width > 0 && std::isfinite(height) && height > 0,
            "image size must be positive");
    require(descriptor_len >= 1, "descriptor_len must be >= 1");
    require(descriptor_noise_sigma >= 0 && position_noise_sigma >= 0 &&
                scale_noise_sigma >= 0 && orientation_noise_sigma >= 0,
            "noise sigmas must be >= 0");
    require(unpaired_fraction >= 0 && unpaired_fraction <= 1, "unpaired_fraction must be in [0, 1]");
    require(repeated_fraction >= 0 && repeated_fraction <= 1, "repeated_fraction must be in [0, 1]");
    require(std::abs(warp.determinant()) > 1e-12, "warp must be invertible");
    if (region) {
      require(region->x0 >= 0 && region->y0 >= 0 && region->x1 <= width &&
                  region->y1 <= height && region->x0 < region->x1 && region->y0 < region->y1,
              "region must lie inside the image");
    }
  }
};

struct GroundTruth {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  ///< (ref, tgt), ascending ref
  Homography warp;
  std::vector<bool> ref_unpaired;
  std::vector<bool> tgt_unpaired;
  /// Motion group of every feature; all zero for single-motion scenes.
  std::vector<int> ref_group;
  std::vector<int> tgt_group;
  std::vector<Homography> group_warps;

  /// Planted target of a reference feature, or kUnmatched.
  std::vector<std::size_t> target_of(std::size_t ref_count) const {
    std::vector<std::size_t> t(ref_count, kUnmatched);
    for (const auto& [r, g] : pairs) t[r] = g;
    return t;
  }
};

struct Scene {
  FeatureSet ref;
  FeatureSet tgt;
  GroundTruth truth;
};

/// Similarity about the image center followed by a translation.
inline Homography similarity_warp(double width, double height, double angle_rad, double scale,
                                  double tx = 0.0, double ty = 0.0) {
  const double c = scale * std::cos(angle_rad), s = scale * std::sin(angle_rad);
  const double cx = width / 2, cy = height / 2;
  return Homography({c, -s, cx - (c * cx - s * cy) + tx, s, c, cy - (s * cx + c * cy) + ty,
                     0.0, 0.0, 1.0});
}

namespace detail {

inline std::vector<double> random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& x : v) {
      x = g(rng);
      n2 += x * x;
    }
  } while (n2 == 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
  return v;
}

inline std::vector<double> perturb(std::mt19937_64& rng, const std::vector<double>& base,
                                   double sigma) {
  if (sigma == 0.0) return base;
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> v(base);
  double n2 = 0.0;
  for (double& x : v) {
    x += g(rng);
    n2 += x * x;
  }
  if (n2 == 0.0) return base;
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
  return v;
}

}  // namespace detail

inline Scene generate(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.rng_seed);
  const Region region = spec.region.value_or(Region{0.0, 0.0, spec.width, spec.height});
  std::uniform_real_distribution<double> ux(region.x0, std::nextafter(region.x1, region.x0));
  std::uniform_real_distribution<double> uy(region.y0, std::nextafter(region.y1, region.y0));
  std::uniform_real_distribution<double> tx(0.0, std::nextafter(spec.width, 0.0));
  std::uniform_real_distribution<double> ty(0.0, std::nextafter(spec.height, 0.0));
  std::uniform_real_distribution<double> log_scale(std::log(1.5), std::log(8.0));
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const std::size_t n = spec.n_features;
  const auto paired_count = static_cast<std::size_t>(
      std::llround(static_cast<double>(n) * (1.0 - spec.unpaired_fraction)));

  // which reference features are paired
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> paired(n, false);
  for (std::size_t k = 0; k < paired_count; ++k) paired[order[k]] = true;

  // repetition groups: one shared base descriptor per group
  std::vector<int> group_of(n, -1);
  std::vector<std::vector<double>> group_base;
  if (spec.repetition_groups > 0) {
    std::shuffle(order.begin(), order.end(), rng);
    const auto repeated = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * spec.repeated_fraction));
    for (std::size_t g = 0; g < spec.repetition_groups; ++g) {
      group_base.push_back(detail::random_unit(rng, spec.descriptor_len));
    }
    for (std::size_t k = 0; k < repeated; ++k) {
      group_of[order[k]] = static_cast<int>(k % spec.repetition_groups);
    }
  }

  // Keep warped positions 3 sigma inside the target frame so clipped noise
  // cannot push them out.
  const double margin = 3.0 * spec.position_noise_sigma;
  auto inside_target = [&](Point p) {
    return p.x >= margin && p.x < spec.width - margin && p.y >= margin &&
           p.y < spec.height - margin;
  };

  std::vector<Feature> ref(n);
  std::size_t placed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Feature& f = ref[i];
    bool ok = false;
    for (int attempt = 0; attempt < (paired[i] ? 256 : 1); ++attempt) {
      f.x = ux(rng);
      f.y = uy(rng);
      if (!paired[i] || inside_target(spec.warp.apply(f.position()))) {
        ok = true;
        break;
      }
    }
    if (paired[i]) {
      if (ok) {
        ++placed;
      } else {
        paired[i] = false;
      }
    }
    f.scale = std::exp(log_scale(rng));
    f.orientation = angle(rng);
    f.descriptor = group_of[i] >= 0 ? group_base[static_cast<std::size_t>(group_of[i])]
                                    : detail::random_unit(rng, spec.descriptor_len);
  }
  if (paired_count > 0 && placed < std::min<std::size_t>(10, paired_count)) {
    throw InputError("warp maps too few features inside the target image");
  }

  std::vector<Feature> tgt;
  GroundTruth truth;
  truth.warp = spec.warp;
  truth.group_warps = {spec.warp};
  truth.ref_unpaired.assign(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    if (!paired[i]) continue;
    const Feature& s = ref[i];
    Feature t;
    Point p = spec.warp.apply(s.position());
    if (spec.position_noise_sigma > 0.0) {
      double dx = gauss(rng) * spec.position_noise_sigma;
      double dy = gauss(rng) * spec.position_noise_sigma;
      const double r = std::hypot(dx, dy), cap = 3.0 * spec.position_noise_sigma;
      if (r > cap) {
        dx *= cap / r;
        dy *= cap / r;
      }
      p.x += dx;
      p.y += dy;
    }
    t.x = p.x;
    t.y = p.y;
    // local similarity approximation of the warp at the source position
    const auto j = spec.warp.jacobian(s.position());
    const double local_scale = std::sqrt(std::abs(j[0] * j[3] - j[1] * j[2]));
    const double local_angle = std::atan2(j[2] - j[1], j[0] + j[3]);
    t.scale = s.scale * local_scale;
    if (spec.scale_noise_sigma > 0.0) t.scale *= std::exp(gauss(rng) * spec.scale_noise_sigma);
    t.orientation = wrap_angle(s.orientation + local_angle +
                               (spec.orientation_noise_sigma > 0.0
                                    ? gauss(rng) * spec.orientation_noise_sigma
                                    : 0.0));
    t.descriptor = detail::perturb(rng, s.descriptor, spec.descriptor_noise_sigma);
    truth.pairs.emplace_back(i, tgt.size());
    truth.ref_unpaired[i] = false;
    tgt.push_back(std::move(t));
  }
  truth.tgt_unpaired.assign(tgt.size(), false);
  const std::size_t clutter = n - paired_count;
  for (std::size_t k = 0; k < clutter; ++k) {
    Feature t;
    t.x = tx(rng);
    t.y = ty(rng);
    t.scale = std::exp(log_scale(rng));
    t.orientation = angle(rng);
    t.descriptor = detail::random_unit(rng, spec.descriptor_len);
    tgt.push_back(std::move(t));
    truth.tgt_unpaired.push_back(true);
  }
  truth.ref_group.assign(n, 0);
  truth.tgt_group.assign(tgt.size(), 0);

  if (tgt.empty()) {
    throw InputError("scene has no target features");
  }
  return Scene{FeatureSet(spec.width, spec.height, std::move(ref)),
               FeatureSet(spec.width, spec.height, std::move(tgt)), std::move(truth)};
}

/// Two independently warped groups in one image pair. Group A occupies the
/// low index range on both sides, group B follows. The combined truth keeps
/// group A's warp as `warp`; per-feature groups and both warps are recorded.
inline Scene two_motion_scene(const SceneSpec& a, const SceneSpec& b) {
  Scene sa = generate(a);
  Scene sb = generate(b);
  const double w = std::max(a.width, b.width);
  const double h = std::max(a.height, b.height);
  std::vector<Feature> ref(sa.ref.features().begin(), sa.ref.features().end());
  ref.insert(ref.end(), sb.ref.features().begin(), sb.ref.features().end());
  std::vector<Feature> tgt(sa.tgt.features().begin(), sa.tgt.features().end());
  tgt.insert(tgt.end(), sb.tgt.features().begin(), sb.tgt.features().end());

  GroundTruth truth;
  truth.warp = a.warp;
  truth.group_warps = {a.warp, b.warp};
  truth.pairs = sa.truth.pairs;
  for (const auto& [r, t] : sb.truth.pairs) {
    truth.pairs.emplace_back(r + sa.ref.size(), t + sa.tgt.size());
  }
  truth.ref_unpaired = sa.truth.ref_unpaired;
  truth.ref_unpaired.insert(truth.ref_unpaired.end(), sb.truth.ref_unpaired.begin(),
                            sb.truth.ref_unpaired.end());
  truth.tgt_unpaired = sa.truth.tgt_unpaired;
  truth.tgt_unpaired.insert(truth.tgt_unpaired.end(), sb.truth.tgt_unpaired.begin(),
                            sb.truth.tgt_unpaired.end());
  truth.ref_group.assign(sa.ref.size(), 0);
  truth.ref_group.resize(sa.ref.size() + sb.ref.size(), 1);
  truth.tgt_group.assign(sa.tgt.size(), 0);
  truth.tgt_group.resize(sa.tgt.size() + sb.tgt.size(), 1);

  return Scene{FeatureSet(w, h, std::move(ref)), FeatureSet(w, h, std::move(tgt)),
               std::move(truth)};
}

}  // namespace mrfmatch
