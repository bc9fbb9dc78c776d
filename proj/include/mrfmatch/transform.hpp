#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace mrfmatch {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double squared_distance(Point a, Point b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// 2D similarity x -> s R x + t, stored as the linear part [[a, -b], [b, a]]
/// (a = s cos(theta), b = s sin(theta)) plus a translation.
class SimilarityTransform {
 public:
  SimilarityTransform() = default;

  /// The pose of a feature patch: maps the unit patch at the origin onto the
  /// patch at (x, y) with the given scale and orientation.
  static SimilarityTransform from_pose(double x, double y, double scale, double angle) {
    return SimilarityTransform(scale * std::cos(angle), scale * std::sin(angle), x, y);
  }

  /// Accepts a homogeneous 3x3 matrix of similarity form; throws
  /// std::invalid_argument otherwise (tolerance 1e-9).
  static SimilarityTransform from_matrix(const Matrix3& m) {
    constexpr double tol = 1e-9;
    if (std::abs(m[2][0]) > tol || std::abs(m[2][1]) > tol || std::abs(m[2][2] - 1.0) > tol) {
      throw std::invalid_argument("similarity: bottom row must be (0, 0, 1)");
    }
    if (std::abs(m[0][0] - m[1][1]) > tol || std::abs(m[0][1] + m[1][0]) > tol) {
      throw std::invalid_argument("similarity: linear part is not a scaled rotation");
    }
    if (std::hypot(m[0][0], m[1][0]) <= tol) {
      throw std::invalid_argument("similarity: scale must be positive");
    }
    return SimilarityTransform(m[0][0], m[1][0], m[0][2], m[1][2]);
  }

  double scale() const noexcept { return std::hypot(a_, b_); }
  double angle() const noexcept { return std::atan2(b_, a_); }
  Point translation() const noexcept { return {tx_, ty_}; }

  Point apply(Point p) const noexcept {
    return {a_ * p.x - b_ * p.y + tx_, b_ * p.x + a_ * p.y + ty_};
  }

  SimilarityTransform inverse() const noexcept {
    const double n = a_ * a_ + b_ * b_;
    const double ia = a_ / n;
    const double ib = -b_ / n;
    return SimilarityTransform(ia, ib, -(ia * tx_ - ib * ty_), -(ib * tx_ + ia * ty_));
  }

  /// (*this) * rhs, i.e. rhs is applied first.
  SimilarityTransform operator*(const SimilarityTransform& rhs) const noexcept {
    const Point t = apply(rhs.translation());
    return SimilarityTransform(a_ * rhs.a_ - b_ * rhs.b_, a_ * rhs.b_ + b_ * rhs.a_, t.x, t.y);
  }

  Matrix3 matrix() const noexcept {
    return {{{a_, -b_, tx_}, {b_, a_, ty_}, {0.0, 0.0, 1.0}}};
  }

 private:
  SimilarityTransform(double a, double b, double tx, double ty)
      : a_(a), b_(b), tx_(tx), ty_(ty) {}

  double a_ = 1.0;
  double b_ = 0.0;
  double tx_ = 0.0;
  double ty_ = 0.0;
};

/// General projective 2D transform, row-major.
class Homography {
 public:
  Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}
  explicit Homography(const std::array<double, 9>& m) : m_(m) {}

  static Homography from_similarity(const SimilarityTransform& s) {
    const Matrix3 m = s.matrix();
    return Homography({m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2],
                       m[2][0], m[2][1], m[2][2]});
  }

  const std::array<double, 9>& data() const noexcept { return m_; }
  double operator()(int r, int c) const noexcept { return m_[r * 3 + c]; }

  double determinant() const noexcept {
    const auto& m = m_;
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
  }

  /// Applies the transform with projective division.
  Point apply(Point p) const noexcept {
    const auto& m = m_;
    const double w = m[6] * p.x + m[7] * p.y + m[8];
    return {(m[0] * p.x + m[1] * p.y + m[2]) / w, (m[3] * p.x + m[4] * p.y + m[5]) / w};
  }

  /// Jacobian of apply() at p, row-major 2x2.
  std::array<double, 4> jacobian(Point p) const noexcept {
    const auto& m = m_;
    const double u = m[0] * p.x + m[1] * p.y + m[2];
    const double v = m[3] * p.x + m[4] * p.y + m[5];
    const double w = m[6] * p.x + m[7] * p.y + m[8];
    const double w2 = w * w;
    return {(m[0] * w - u * m[6]) / w2, (m[1] * w - u * m[7]) / w2,
            (m[3] * w - v * m[6]) / w2, (m[4] * w - v * m[7]) / w2};
  }

 private:
  std::array<double, 9> m_;
};

}  // namespace mrfmatch
