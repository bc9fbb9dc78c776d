#include <gtest/gtest.h>

#include "support.hpp"

using namespace testing_support;

namespace {

void expect_matrix(const Matrix3& m, const Matrix3& want, double tol = 1e-12) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(m[r][c], want[r][c], tol) << r << "," << c;
}

// Applies x -> k R x + t to every feature of a set.
FeatureSet moved(const FeatureSet& s, double angle, double k, Point t) {
  std::vector<Feature> fs(s.features().begin(), s.features().end());
  const double c = std::cos(angle), sn = std::sin(angle);
  for (auto& f : fs) {
    const double x = f.x, y = f.y;
    f.x = k * (c * x - sn * y) + t.x;
    f.y = k * (sn * x + c * y) + t.y;
    f.scale *= k;
    f.orientation += angle;
  }
  return FeatureSet(1e6, 1e6, std::move(fs), IngestOptions{true});
}

}  // namespace

TEST(Pose, Examples) {
  expect_matrix(pose_of(feature(0, 0, 1, 0)).matrix(), {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}});
  expect_matrix(pose_of(feature(10, 0, 1, 0)).matrix(), {{{1, 0, 10}, {0, 1, 0}, {0, 0, 1}}});
  expect_matrix(pose_of(feature(0, 0, 2, kPi / 2)).matrix(), {{{0, -2, 0}, {2, 0, 0}, {0, 0, 1}}});
}

TEST(Pose, InverseComposesToIdentity) {
  std::mt19937_64 rng(11);
  const FeatureSet s = random_set(rng, 200);
  for (std::size_t i = 0; i < s.size(); ++i) {
    expect_matrix((s.pose(i) * s.inverse_pose(i)).matrix(),
                  {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, 1e-9);
    expect_matrix((s.inverse_pose(i) * s.pose(i)).matrix(),
                  {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, 1e-9);
  }
}

TEST(Similarity, FromMatrixRoundTrip) {
  const auto t = SimilarityTransform::from_pose(3, -4, 1.5, 0.7);
  const auto back = SimilarityTransform::from_matrix(t.matrix());
  EXPECT_NEAR(back.scale(), 1.5, 1e-12);
  EXPECT_NEAR(back.angle(), 0.7, 1e-12);
  EXPECT_NEAR(back.translation().x, 3, 1e-12);
  EXPECT_THROW(SimilarityTransform::from_matrix({{{1, 0, 0}, {0, 2, 0}, {0, 0, 1}}}),
               std::invalid_argument);
  EXPECT_THROW(SimilarityTransform::from_matrix({{{1, 0, 0}, {0, 1, 0}, {0.1, 0, 1}}}),
               std::invalid_argument);
}

TEST(Homography, SimilarityAgreesAndJacobian) {
  const auto s = SimilarityTransform::from_pose(5, 6, 2, 0.4);
  const auto h = Homography::from_similarity(s);
  const Point a = s.apply({3, 4}), b = h.apply({3, 4});
  EXPECT_NEAR(a.x, b.x, 1e-12);
  EXPECT_NEAR(a.y, b.y, 1e-12);
  EXPECT_NEAR(h.determinant(), 4.0, 1e-12);
  const Homography p({1, 0.1, 3, -0.2, 1.1, 2, 1e-3, 2e-3, 1});
  const Point q{40, 70};
  const auto j = p.jacobian(q);
  const double e = 1e-6;
  const Point dx1 = p.apply({q.x + e, q.y}), dx0 = p.apply({q.x - e, q.y});
  const Point dy1 = p.apply({q.x, q.y + e}), dy0 = p.apply({q.x, q.y - e});
  EXPECT_NEAR(j[0], (dx1.x - dx0.x) / (2 * e), 1e-6);
  EXPECT_NEAR(j[2], (dx1.y - dx0.y) / (2 * e), 1e-6);
  EXPECT_NEAR(j[1], (dy1.x - dy0.x) / (2 * e), 1e-6);
  EXPECT_NEAR(j[3], (dy1.y - dy0.y) / (2 * e), 1e-6);
}

TEST(Transfer, Examples) {
  const FeatureSet ref = make_set({feature(0, 0, 1, 0), feature(5, 5, 1, 0), feature(1, 0, 1, 0)});
  const FeatureSet tgt = make_set({feature(10, 0, 1, 0), feature(15, 5, 1, 0), feature(16, 5, 1, 0),
                                   feature(0, 0, 2, kPi / 2)});
  EXPECT_NEAR(transfer_distance(ref, tgt, {0, 0}, {1, 1}), 0.0, 1e-12);
  EXPECT_NEAR(transfer_distance(ref, tgt, {0, 0}, {1, 2}), 1.0, 1e-12);
  // s = (0,0,1,0), t = (0,0,2,pi/2): (1,0) -> (0,2), distance to (0,0) is 2
  EXPECT_NEAR(transfer_distance(ref, tgt, {0, 3}, {2, 3}), 4.0, 1e-12);
  EXPECT_EQ(transfer_distance(ref, tgt, {0, 0}, {1, kUnmatched}), 0.0);
  EXPECT_EQ(transfer_distance(ref, tgt, {0, kUnmatched}, {1, 1}), 0.0);
}

TEST(Pairwise, Examples) {
  const FeatureSet ref = make_set({feature(0, 0, 1, 0), feature(5, 5, 2, 1)});
  const FeatureSet tgt = make_set({feature(30, 40, 1, 0), feature(35, 45, 2, 1)});
  EXPECT_NEAR(pairwise_energy(ref, tgt, {0, 0}, {1, 1}), 0.0, 1e-12);
  EXPECT_EQ(pairwise_energy(ref, tgt, {0, 0}, {1, kUnmatched}), 0.0);
  EXPECT_EQ(pairwise_energy(ref, tgt, {0, kUnmatched}, {1, 1}), 0.0);
}

TEST(Pairwise, MatchesIndependentEvaluator) {
  std::mt19937_64 rng(5);
  const FeatureSet ref = random_set(rng, 60), tgt = random_set(rng, 60);
  std::uniform_int_distribution<std::size_t> pick(0, 59);
  for (int i = 0; i < 2000; ++i) {
    const Correspondence a{pick(rng), pick(rng)}, b{pick(rng), pick(rng)};
    const double want = ref_pairwise(ref, tgt, a, b);
    EXPECT_NEAR(pairwise_energy(ref, tgt, a, b), want, 1e-9 * std::max(1.0, want));
    const double tau = ref_transfer(ref[a.ref], tgt[a.tgt], ref[b.ref], tgt[b.tgt]);
    EXPECT_NEAR(transfer_distance(ref, tgt, a, b), tau, 1e-9 * std::max(1.0, tau));
  }
}

TEST(Pairwise, ExactlySymmetric) {
  std::mt19937_64 rng(6);
  const FeatureSet ref = random_set(rng, 100), tgt = random_set(rng, 100);
  std::uniform_int_distribution<std::size_t> pick(0, 99);
  for (int i = 0; i < 10000; ++i) {
    const Correspondence a{pick(rng), pick(rng)}, b{pick(rng), pick(rng)};
    ASSERT_EQ(pairwise_energy(ref, tgt, a, b), pairwise_energy(ref, tgt, b, a));
  }
}

TEST(Pairwise, RigidMotionOfTargetChangesNothing) {
  std::mt19937_64 rng(7);
  const FeatureSet ref = random_set(rng, 40), tgt = random_set(rng, 40);
  const FeatureSet tgt2 = moved(tgt, 0.8, 1.0, {123.0, -45.0});
  std::uniform_int_distribution<std::size_t> pick(0, 39);
  for (int i = 0; i < 1000; ++i) {
    const Correspondence a{pick(rng), pick(rng)}, b{pick(rng), pick(rng)};
    EXPECT_NEAR(transfer_distance(ref, tgt2, a, b), transfer_distance(ref, tgt, a, b), 1e-6);
    EXPECT_NEAR(pairwise_energy(ref, tgt2, a, b), pairwise_energy(ref, tgt, a, b), 1e-6);
  }
}

TEST(Pairwise, GlobalScaleMultipliesBySquare) {
  std::mt19937_64 rng(8);
  const FeatureSet ref = random_set(rng, 40), tgt = random_set(rng, 40);
  const double k = 2.5;
  const FeatureSet tgt_k = moved(tgt, 0.0, k, {0, 0});
  const FeatureSet ref_k = moved(ref, 0.0, k, {0, 0});
  std::uniform_int_distribution<std::size_t> pick(0, 39);
  for (int i = 0; i < 1000; ++i) {
    const Correspondence a{pick(rng), pick(rng)}, b{pick(rng), pick(rng)};
    const double t0 = transfer_distance(ref, tgt, a, b);
    EXPECT_NEAR(transfer_distance(ref, tgt_k, a, b), k * k * t0, 1e-6 * k * k * t0 + 1e-12);
    const double e0 = pairwise_energy(ref, tgt, a, b);
    EXPECT_NEAR(pairwise_energy(ref_k, tgt_k, a, b), k * k * e0, 1e-6 * k * k * e0 + 1e-12);
  }
}
