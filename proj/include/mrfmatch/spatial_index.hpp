#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mrfmatch/transform.hpp"

namespace mrfmatch {

/// Exact K-nearest-neighbor queries over a fixed point set, backed by a
/// uniform grid searched in rings of cells around the query.
///
/// Results are the indices into the point list given at construction,
/// ordered by (squared distance, index).
class SpatialIndex {
 public:
  SpatialIndex() = default;

  explicit SpatialIndex(std::vector<Point> points) : points_(std::move(points)) {
    if (points_.empty()) return;
    double x0 = points_[0].x, x1 = x0, y0 = points_[0].y, y1 = y0;
    for (const Point& p : points_) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    origin_ = {x0, y0};
    const double w = std::max(x1 - x0, 1e-9);
    const double h = std::max(y1 - y0, 1e-9);
    // about two points per cell
    cell_ = std::max(std::sqrt(2.0 * w * h / static_cast<double>(points_.size())), 1e-6);
    cols_ = std::clamp<long>(static_cast<long>(w / cell_) + 1, 1, 4096);
    rows_ = std::clamp<long>(static_cast<long>(h / cell_) + 1, 1, 4096);
    cell_ = std::max(w / static_cast<double>(cols_), h / static_cast<double>(rows_)) * (1.0 + 1e-12);
    cols_ = std::max<long>(1, static_cast<long>(std::ceil(w / cell_)));
    rows_ = std::max<long>(1, static_cast<long>(std::ceil(h / cell_)));

    start_.assign(static_cast<std::size_t>(cols_ * rows_) + 1, 0);
    std::vector<std::size_t> cell_of(points_.size());
    for (std::size_t i = 0; i < points_.size(); ++i) {
      cell_of[i] = cell_id(col_of(points_[i].x), row_of(points_[i].y));
      ++start_[cell_of[i] + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    items_.resize(points_.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < points_.size(); ++i) items_[fill[cell_of[i]]++] = i;
  }

  std::size_t size() const noexcept { return points_.size(); }
  Point point(std::size_t i) const { return points_[i]; }

  /// The k points nearest to q, skipping `exclude` if given.
  std::vector<std::size_t> query(Point q, std::size_t k,
                                 std::optional<std::size_t> exclude = std::nullopt) const {
    std::vector<std::pair<double, std::size_t>> best;
    const std::size_t available = points_.size() - (exclude && *exclude < points_.size() ? 1 : 0);
    k = std::min(k, available);
    if (k == 0) return {};
    best.reserve(k + 1);

    auto consider = [&](std::size_t idx) {
      if (exclude && idx == *exclude) return;
      const std::pair<double, std::size_t> cand{squared_distance(q, points_[idx]), idx};
      if (best.size() == k && !(cand < best.back())) return;
      auto it = std::upper_bound(best.begin(), best.end(), cand);
      best.insert(it, cand);
      if (best.size() > k) best.pop_back();
    };

    const long qc = std::clamp(col_of(q.x), 0L, cols_ - 1);
    const long qr = std::clamp(row_of(q.y), 0L, rows_ - 1);
    const long max_ring = std::max({qc, cols_ - 1 - qc, qr, rows_ - 1 - qr});
    for (long ring = 0; ring <= max_ring; ++ring) {
      for (long r = qr - ring; r <= qr + ring; ++r) {
        if (r < 0 || r >= rows_) continue;
        const bool edge_row = (r == qr - ring || r == qr + ring);
        const long step = edge_row ? 1 : 2 * ring;
        for (long c = qc - ring; c <= qc + ring; c += std::max(step, 1L)) {
          if (c < 0 || c >= cols_) continue;
          const std::size_t id = cell_id(c, r);
          for (std::size_t s = start_[id]; s < start_[id + 1]; ++s) consider(items_[s]);
        }
      }
      // Cells beyond this ring lie at least ring * cell_ away from q.
      if (best.size() == k) {
        const double bound = static_cast<double>(ring) * cell_;
        if (best.back().first < bound * bound) break;
      }
    }
    std::vector<std::size_t> out;
    out.reserve(best.size());
    for (const auto& [d, idx] : best) out.push_back(idx);
    return out;
  }

 private:
  long col_of(double x) const {
    return static_cast<long>(std::floor((x - origin_.x) / cell_));
  }
  long row_of(double y) const {
    return static_cast<long>(std::floor((y - origin_.y) / cell_));
  }
  std::size_t cell_id(long c, long r) const {
    c = std::clamp(c, 0L, cols_ - 1);
    r = std::clamp(r, 0L, rows_ - 1);
    return static_cast<std::size_t>(r * cols_ + c);
  }

  std::vector<Point> points_;
  Point origin_;
  double cell_ = 1.0;
  long cols_ = 1;
  long rows_ = 1;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> items_;
};

/// K nearest other points of point `node` in the index.
inline std::vector<std::size_t> knn_neighbors(const SpatialIndex& index, std::size_t node,
                                              std::size_t k) {
  return index.query(index.point(node), k, node);
}

}  // namespace mrfmatch
