#pragma once

// Putative match ratio, precision and matching score against a
// ground-truth homography, plus the comparison table used by benchmarks.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "mrfmatch/core.hpp"
#include "mrfmatch/transform.hpp"

namespace mrfmatch {

inline constexpr double kDefaultInlierTolerance = 10.0;

struct MetricReport {
  std::size_t n_features = 0;  ///< reference side
  std::size_t n_putative = 0;
  std::size_t n_inlier = 0;
  double pmr = 0.0;        ///< percent
  double precision = 0.0;  ///< percent
  double ms = 0.0;         ///< percent
};

/// True iff H maps the reference point strictly within `tol` pixels of the
/// target point.
inline bool is_inlier(Point ref_xy, Point tgt_xy, const Homography& h, double tol) {
  if (h.determinant() == 0.0) throw InputError("homography is singular");
  const Point p = h.apply(ref_xy);
  return std::sqrt(squared_distance(p, tgt_xy)) < tol;
}

inline bool is_inlier(const Correspondence& c, const FeatureSet& ref, const FeatureSet& tgt,
                      const Homography& h, double tol = kDefaultInlierTolerance) {
  if (!c.matched()) throw InputError("inlier test on an unmatched correspondence");
  if (c.ref >= ref.size() || c.tgt >= tgt.size()) throw InputError("match index out of range");
  return is_inlier(ref.position(c.ref), tgt.position(c.tgt), h, tol);
}

/// Builds a report from raw counts. Precision is 0 when nothing is putative.
inline MetricReport make_report(std::size_t n_features, std::size_t n_putative,
                                std::size_t n_inlier) {
  MetricReport r{n_features, n_putative, n_inlier, 0.0, 0.0, 0.0};
  if (n_features > 0) {
    r.pmr = 100.0 * static_cast<double>(n_putative) / static_cast<double>(n_features);
  }
  if (n_putative > 0) {
    r.precision = 100.0 * static_cast<double>(n_inlier) / static_cast<double>(n_putative);
  }
  // MS = #inlier / #features, which equals PMR * Precision / 100
  r.ms = r.pmr * r.precision / 100.0;
  return r;
}

/// Scores matches; unmatched entries are ignored.
inline MetricReport score(std::span<const Correspondence> matches, const FeatureSet& ref,
                          const FeatureSet& tgt, const Homography& h,
                          double tol = kDefaultInlierTolerance) {
  std::size_t putative = 0, inliers = 0;
  for (const auto& c : matches) {
    if (!c.matched()) continue;
    ++putative;
    if (is_inlier(c, ref, tgt, h, tol)) ++inliers;
  }
  return make_report(ref.size(), putative, inliers);
}

// ---------------------------------------------------------------------------
// Comparison tables

struct NamedReport {
  std::string matcher;
  std::string level;  ///< scene collection, e.g. a deformation level
  MetricReport report;
};

struct MetricAverage {
  double pmr = 0.0;
  double precision = 0.0;
  double ms = 0.0;
  std::size_t scenes = 0;
};

struct ComparisonRow {
  std::string matcher;
  std::vector<MetricAverage> per_level;  ///< aligned with ComparisonTable::levels
  MetricAverage overall;
};

struct ComparisonTable {
  std::vector<std::string> levels;
  std::vector<ComparisonRow> rows;
};

/// Averages reports per matcher, per level and overall. Rows and levels
/// keep first-appearance order. Overall is the mean over scenes.
inline ComparisonTable compare(std::span<const NamedReport> reports) {
  ComparisonTable table;
  auto index_of = [](std::vector<std::string>& v, const std::string& s) {
    auto it = std::find(v.begin(), v.end(), s);
    if (it != v.end()) return static_cast<std::size_t>(it - v.begin());
    v.push_back(s);
    return v.size() - 1;
  };
  std::vector<std::string> matchers;
  for (const auto& r : reports) {
    index_of(matchers, r.matcher);
    index_of(table.levels, r.level);
  }
  auto add = [](MetricAverage& a, const MetricReport& r) {
    a.pmr += r.pmr;
    a.precision += r.precision;
    a.ms += r.ms;
    ++a.scenes;
  };
  auto finish = [](MetricAverage& a) {
    if (a.scenes == 0) return;
    const double n = static_cast<double>(a.scenes);
    a.pmr /= n;
    a.precision /= n;
    a.ms /= n;
  };
  for (const auto& name : matchers) {
    ComparisonRow row{name, std::vector<MetricAverage>(table.levels.size()), {}};
    for (const auto& r : reports) {
      if (r.matcher != name) continue;
      add(row.per_level[index_of(table.levels, r.level)], r.report);
      add(row.overall, r.report);
    }
    for (auto& l : row.per_level) finish(l);
    finish(row.overall);
    table.rows.push_back(std::move(row));
  }
  return table;
}

/// Aligned plain-text rendering: one block per metric, one row per matcher,
/// one column per level followed by the overall average.
inline std::string render_table(const ComparisonTable& table) {
  std::size_t name_w = 8;
  for (const auto& r : table.rows) name_w = std::max(name_w, r.matcher.size());
  std::size_t col_w = 8;
  for (const auto& l : table.levels) col_w = std::max(col_w, l.size() + 1);

  std::string out;
  char buf[64];
  auto pad = [](std::string s, std::size_t w, bool left) {
    if (s.size() < w) s = left ? s + std::string(w - s.size(), ' ') : std::string(w - s.size(), ' ') + s;
    return s;
  };
  const char* names[] = {"PMR", "Precision", "MS"};
  for (int metric = 0; metric < 3; ++metric) {
    out += pad(names[metric], name_w, true);
    for (const auto& l : table.levels) out += pad(l, col_w + 1, false);
    out += pad("avg", col_w + 1, false) + "\n";
    auto value = [metric](const MetricAverage& a) {
      return metric == 0 ? a.pmr : metric == 1 ? a.precision : a.ms;
    };
    for (const auto& r : table.rows) {
      out += pad(r.matcher, name_w, true);
      for (const auto& l : r.per_level) {
        std::snprintf(buf, sizeof buf, "%.2f", value(l));
        out += pad(buf, col_w + 1, false);
      }
      std::snprintf(buf, sizeof buf, "%.2f", value(r.overall));
      out += pad(buf, col_w + 1, false) + "\n";
    }
    out += "\n";
  }
  return out;
}

}  // namespace mrfmatch
