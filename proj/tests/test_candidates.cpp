#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"

using namespace testing_support;

namespace {

CandidateList list_of(std::vector<double> d) {
  CandidateList l;
  for (std::size_t i = 0; i < d.size(); ++i) l.entries.push_back({i, d[i]});
  return l;
}

}  // namespace

TEST(Descriptor, Distances) {
  const std::vector<double> e1{1, 0, 0}, e2{0, 1, 0}, m1{-1, 0, 0};
  EXPECT_EQ(descriptor_distance(e1, e1), 0.0);
  EXPECT_DOUBLE_EQ(descriptor_distance(e1, m1), 2.0);
  EXPECT_DOUBLE_EQ(descriptor_distance(e1, e2), std::sqrt(2.0));
  const std::vector<double> short_v{1, 0};
  EXPECT_THROW(descriptor_distance(e1, short_v), InputError);
}

TEST(Descriptor, UnrolledSumAgreesWithNaive) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (std::size_t dim : {1u, 2u, 3u, 5u, 128u}) {
    std::vector<double> a(dim), b(dim);
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng);
    double s = 0;
    for (std::size_t k = 0; k < dim; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    EXPECT_NEAR(descriptor_distance(a, b), std::sqrt(s), 1e-12);
  }
}

TEST(TopKappa, ClampsToTargetCount) {
  std::mt19937_64 rng(2);
  const FeatureSet ref = random_set(rng, 4), tgt = random_set(rng, 3);
  const auto lists = top_kappa(ref, tgt, 15);
  ASSERT_EQ(lists.size(), 4u);
  for (const auto& l : lists) EXPECT_EQ(l.entries.size(), 3u);
}

TEST(TopKappa, IdenticalFeatureFirst) {
  std::mt19937_64 rng(3);
  const FeatureSet tgt = random_set(rng, 20);
  const FeatureSet ref = make_set({tgt[13]}, 500, 500);
  const auto lists = top_kappa(ref, tgt, 5);
  EXPECT_EQ(lists[0].entries[0].target, 13u);
  EXPECT_EQ(lists[0].entries[0].distance, 0.0);
}

TEST(TopKappa, MatchesFullSort) {
  std::mt19937_64 rng(4);
  const FeatureSet ref = random_set(rng, 50), tgt = random_set(rng, 50);
  const auto lists = top_kappa(ref, tgt, 5);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < tgt.size(); ++j) {
      double s = 0;
      for (std::size_t k = 0; k < ref.descriptor_len(); ++k) {
        const double d = ref.descriptor(i)[k] - tgt.descriptor(j)[k];
        s += d * d;
      }
      all.emplace_back(std::sqrt(s), j);
    }
    std::sort(all.begin(), all.end());
    ASSERT_EQ(lists[i].entries.size(), 5u);
    for (std::size_t r = 0; r < 5; ++r) {
      EXPECT_EQ(lists[i].entries[r].target, all[r].second);
      EXPECT_NEAR(lists[i].entries[r].distance, all[r].first, 1e-12);
    }
  }
}

TEST(TopKappa, TiesPreferLowerTarget) {
  const FeatureSet tgt = make_set({feature(1, 1, 1, 0, {0, 1, 0, 0}), feature(2, 2, 1, 0, {0, 1, 0, 0}),
                                   feature(3, 3, 1, 0, {0, 1, 0, 0})});
  const FeatureSet ref = make_set({feature(1, 1, 1, 0, {1, 0, 0, 0})});
  const auto l = top_kappa(ref, tgt, 3)[0];
  EXPECT_EQ(l.entries[0].target, 0u);
  EXPECT_EQ(l.entries[1].target, 1u);
  EXPECT_EQ(l.entries[2].target, 2u);
}

TEST(Nndr, Examples) {
  EXPECT_TRUE(nndr_accepts(list_of({0.4, 0.8}), 0.8));
  EXPECT_FALSE(nndr_accepts(list_of({0.7, 0.8}), 0.8));
  EXPECT_FALSE(nndr_accepts(list_of({0.4, 0.5}), 0.8));  // exactly 0.8: strict
  EXPECT_DOUBLE_EQ(nndr_ratio(list_of({0.0, 0.0})), 1.0);
  EXPECT_FALSE(nndr_accepts(list_of({0.0, 0.0}), 0.99));
  EXPECT_TRUE(nndr_accepts(list_of({0.0, 0.0}), 1.0));
  EXPECT_TRUE(nndr_accepts(list_of({0.3}), 0.5));
  EXPECT_FALSE(nndr_accepts(CandidateList{}, 1.0));
}

TEST(Nndr, ThetaOneMatchesEverything) {
  std::mt19937_64 rng(5);
  const FeatureSet ref = random_set(rng, 80), tgt = random_set(rng, 60);
  const auto m = nndr_match(ref, tgt, 1.0);
  const auto r = score(m, ref, tgt, Homography(), 10.0);
  EXPECT_DOUBLE_EQ(r.pmr, 100.0);
  const auto lists = top_kappa(ref, tgt, 2);
  for (const auto& c : m) EXPECT_EQ(c.tgt, lists[c.ref].entries[0].target);
}

TEST(Nndr, Preconditions) {
  std::mt19937_64 rng(6);
  const FeatureSet ref = random_set(rng, 5), one = random_set(rng, 1);
  EXPECT_THROW(nndr_match(ref, one, 0.8), InputError);
  EXPECT_THROW(nndr_match(ref, ref, 0.0), InputError);
  EXPECT_THROW(nndr_match(ref, ref, 1.2), InputError);
}

TEST(SpatialIndex, Collinear) {
  const SpatialIndex idx({{0, 0}, {1, 0}, {2, 0}, {3, 0}});
  EXPECT_EQ(knn_neighbors(idx, 0, 2), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(knn_neighbors(idx, 0, 3), (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(knn_neighbors(idx, 0, 10), (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(knn_neighbors(idx, 1, 2), (std::vector<std::size_t>{0, 2}));
}

TEST(SpatialIndex, MatchesLinearScan) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, seed % 2 ? 600.0 : 10.0);
    std::vector<Point> pts(200);
    for (auto& p : pts) p = {u(rng), u(rng)};
    if (seed % 3 == 0) pts[5] = pts[17];  // duplicate position
    const SpatialIndex idx(pts);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      std::vector<std::pair<double, std::size_t>> all;
      for (std::size_t j = 0; j < pts.size(); ++j)
        if (j != i) all.emplace_back(squared_distance(pts[i], pts[j]), j);
      std::sort(all.begin(), all.end());
      std::vector<std::size_t> want;
      for (std::size_t r = 0; r < 5; ++r) want.push_back(all[r].second);
      ASSERT_EQ(knn_neighbors(idx, i, 5), want) << "seed " << seed << " point " << i;
    }
    // arbitrary query points, including outside the bounding box
    for (int q = 0; q < 50; ++q) {
      const Point p{u(rng) * 1.5 - 50, u(rng) * 1.5 - 50};
      std::vector<std::pair<double, std::size_t>> all;
      for (std::size_t j = 0; j < pts.size(); ++j) all.emplace_back(squared_distance(p, pts[j]), j);
      std::sort(all.begin(), all.end());
      const auto got = idx.query(p, 7);
      ASSERT_EQ(got.size(), 7u);
      for (std::size_t r = 0; r < 7; ++r) EXPECT_EQ(got[r], all[r].second);
    }
  }
}

TEST(SpatialIndex, Degenerate) {
  EXPECT_TRUE(SpatialIndex(std::vector<Point>{}).query({0, 0}, 3).empty());
  const SpatialIndex one({{2, 2}});
  EXPECT_TRUE(knn_neighbors(one, 0, 3).empty());
  EXPECT_EQ(one.query({0, 0}, 3), (std::vector<std::size_t>{0}));
  const SpatialIndex same({{1, 1}, {1, 1}, {1, 1}});
  EXPECT_EQ(knn_neighbors(same, 1, 5), (std::vector<std::size_t>{0, 2}));
}
