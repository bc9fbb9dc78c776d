#pragma once

// Bidirectional transfer measure between two candidate correspondences.
//
// A correspondence c = (s, t) induces the local similarity T_t T_s^-1 from
// the reference image to the target image. The one-way transfer distance of
// c' = (s', t') given c is the squared pixel error between x_t' and the
// image of x_s' under that similarity. The pairwise energy sums four such
// terms: both correspondences as the anchor, in both image directions.

#include "mrfmatch/core.hpp"

namespace mrfmatch {

inline SimilarityTransform pose_of(const Feature& f) {
  return SimilarityTransform::from_pose(f.x, f.y, f.scale, f.orientation);
}

namespace detail {

// ||dst_pose * src_inverse * src_point - dst_point||^2
inline double warp_error(const SimilarityTransform& src_inverse,
                         const SimilarityTransform& dst_pose, Point src_point,
                         Point dst_point) noexcept {
  return squared_distance(dst_pose.apply(src_inverse.apply(src_point)), dst_point);
}

}  // namespace detail

/// One-way transfer distance tau(c'; c) in squared target pixels. Zero when
/// either correspondence is unmatched.
inline double transfer_distance(const FeatureSet& ref, const FeatureSet& tgt,
                                const Correspondence& c, const Correspondence& c_prime) {
  if (!c.matched() || !c_prime.matched()) return 0.0;
  return detail::warp_error(ref.inverse_pose(c.ref), tgt.pose(c.tgt),
                            ref.position(c_prime.ref), tgt.position(c_prime.tgt));
}

/// Pairwise energy e_psi(c, c') in squared pixels.
///
/// Summed as (forward pair) + (backward pair); swapping the arguments only
/// swaps operands within each pair, so the result is exactly symmetric.
inline double pairwise_energy(const FeatureSet& ref, const FeatureSet& tgt,
                              const Correspondence& c, const Correspondence& c_prime) {
  if (!c.matched() || !c_prime.matched()) return 0.0;
  const std::size_t s = c.ref, t = c.tgt, s2 = c_prime.ref, t2 = c_prime.tgt;
  const double fwd_a = detail::warp_error(ref.inverse_pose(s), tgt.pose(t),
                                          ref.position(s2), tgt.position(t2));
  const double fwd_b = detail::warp_error(ref.inverse_pose(s2), tgt.pose(t2),
                                          ref.position(s), tgt.position(t));
  const double bwd_a = detail::warp_error(tgt.inverse_pose(t), ref.pose(s),
                                          tgt.position(t2), ref.position(s2));
  const double bwd_b = detail::warp_error(tgt.inverse_pose(t2), ref.pose(s2),
                                          tgt.position(t), ref.position(s));
  return (fwd_a + fwd_b) + (bwd_a + bwd_b);
}

}  // namespace mrfmatch
