#pragma once

// Descriptor-space search: exhaustive top-kappa candidate lists and the
// nearest-neighbor distance ratio (NNDR) baseline matchers.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mrfmatch/core.hpp"

namespace mrfmatch {

/// Euclidean distance between two descriptors of equal length.
inline double descriptor_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("descriptor length mismatch");
  // four independent partial sums; fixed order keeps results reproducible
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  const std::size_t n = a.size();
  for (; i + 4 <= n; i += 4) {
    const double d0 = a[i] - b[i];
    const double d1 = a[i + 1] - b[i + 1];
    const double d2 = a[i + 2] - b[i + 2];
    const double d3 = a[i + 3] - b[i + 3];
    s0 += d0 * d0;
    s1 += d1 * d1;
    s2 += d2 * d2;
    s3 += d3 * d3;
  }
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s0 += d * d;
  }
  return std::sqrt((s0 + s1) + (s2 + s3));
}

struct Candidate {
  std::size_t target = 0;
  double distance = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// Orders by distance, then by lower target index.
inline bool candidate_less(const Candidate& a, const Candidate& b) noexcept {
  return a.distance < b.distance || (a.distance == b.distance && a.target < b.target);
}

/// The best descriptor matches of one reference feature, ascending.
/// The unmatched label is implicit and not stored.
struct CandidateList {
  std::size_t ref_index = 0;
  std::vector<Candidate> entries;
};

namespace detail {

inline void nearest_targets(const FeatureSet& ref, std::size_t i, const FeatureSet& tgt,
                            std::size_t count, std::vector<Candidate>& scratch,
                            std::vector<Candidate>& out) {
  scratch.resize(tgt.size());
  const auto d = ref.descriptor(i);
  for (std::size_t j = 0; j < tgt.size(); ++j) {
    scratch[j] = {j, descriptor_distance(d, tgt.descriptor(j))};
  }
  const std::size_t k = std::min(count, scratch.size());
  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k),
                    scratch.end(), candidate_less);
  out.assign(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k));
}

}  // namespace detail

/// Exhaustive top-kappa search; kappa is clamped to the target set size.
inline std::vector<CandidateList> top_kappa(const FeatureSet& ref, const FeatureSet& tgt,
                                            std::size_t kappa) {
  if (tgt.size() > 0 && ref.size() > 0 && ref.descriptor_len() != tgt.descriptor_len()) {
    throw InputError("descriptor length mismatch between feature sets");
  }
  std::vector<CandidateList> lists(ref.size());
  std::vector<Candidate> scratch;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    lists[i].ref_index = i;
    detail::nearest_targets(ref, i, tgt, kappa, scratch, lists[i].entries);
  }
  return lists;
}

/// Ratio of nearest to second-nearest distance. A zero second distance
/// (exact duplicates) counts as ratio 1; a single entry counts as ratio 0.
inline double nndr_ratio(const CandidateList& list) {
  if (list.entries.empty()) return 1.0;
  if (list.entries.size() < 2) return 0.0;
  const double d2 = list.entries[1].distance;
  if (d2 <= 0.0) return 1.0;
  return list.entries[0].distance / d2;
}

/// NNDR acceptance test; theta >= 1 accepts every nearest neighbor.
inline bool nndr_accepts(const CandidateList& list, double theta) {
  if (list.entries.empty()) return false;
  if (theta >= 1.0) return true;
  return nndr_ratio(list) < theta;
}

/// NNDR matcher over precomputed lists holding at least two entries each.
inline std::vector<Correspondence> nndr_match(std::span<const CandidateList> lists,
                                              double theta) {
  std::vector<Correspondence> out;
  for (const auto& list : lists) {
    if (nndr_accepts(list, theta)) out.push_back({list.ref_index, list.entries[0].target});
  }
  return out;
}

inline std::vector<Correspondence> nndr_match(const FeatureSet& ref, const FeatureSet& tgt,
                                              double theta) {
  if (tgt.size() < 2) throw InputError("NNDR matching needs at least two target features");
  if (!(theta > 0.0 && theta <= 1.0)) throw InputError("NNDR threshold must be in (0, 1]");
  const auto lists = top_kappa(ref, tgt, 2);
  return nndr_match(lists, theta);
}

}  // namespace mrfmatch
