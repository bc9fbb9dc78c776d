#pragma once

// Named matchers used by benchmarks: nearest neighbor, two NNDR thresholds,
// the full-graph BP ablation and the progressive matcher.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrfmatch/candidates.hpp"
#include "mrfmatch/progressive.hpp"

namespace mrfmatch {

enum class MatcherKind { nearest, nndr1, nndr2, non_progressive, progressive };

inline constexpr double kNndr1Theta = 0.9;
inline constexpr double kNndr2Theta = 0.8;

inline std::string_view matcher_name(MatcherKind k) {
  switch (k) {
    case MatcherKind::nearest: return "nearest";
    case MatcherKind::nndr1: return "nndr1";
    case MatcherKind::nndr2: return "nndr2";
    case MatcherKind::non_progressive: return "nonprog";
    case MatcherKind::progressive: return "prog";
  }
  return "?";
}

inline std::optional<MatcherKind> parse_matcher(std::string_view name) {
  for (auto k : {MatcherKind::nearest, MatcherKind::nndr1, MatcherKind::nndr2,
                 MatcherKind::non_progressive, MatcherKind::progressive}) {
    if (matcher_name(k) == name) return k;
  }
  return std::nullopt;
}

inline MatchResult run_matcher(MatcherKind kind, const FeatureSet& ref, const FeatureSet& tgt,
                               const MatcherConfig& config) {
  auto from_nndr = [&](double theta) {
    MatchResult r;
    for (const auto& c : nndr_match(ref, tgt, theta)) r.matches.push_back({c, 0.0, 0});
    return r;
  };
  switch (kind) {
    case MatcherKind::nearest: return from_nndr(1.0);
    case MatcherKind::nndr1: return from_nndr(kNndr1Theta);
    case MatcherKind::nndr2: return from_nndr(kNndr2Theta);
    case MatcherKind::non_progressive: return match_non_progressive(ref, tgt, config);
    case MatcherKind::progressive: return match(ref, tgt, config);
  }
  throw InvariantViolation("unknown matcher");
}

}  // namespace mrfmatch
