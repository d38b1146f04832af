// Copyright 2026 The STMD Tracker Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stmd/errors.hpp"
#include "stmd/kernels.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace stmd;

namespace {

Matrix random_points(int n, std::uint64_t seed, double scale = 5.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix p(n, 3);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) p(i, c) = u(rng);
  return p;
}

// Grid with many exact distance ties.
Matrix grid_points() {
  Matrix p(27, 3);
  int r = 0;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y)
      for (int z = 0; z < 3; ++z) p.row(r++) << x, y, z;
  return p;
}

}  // namespace

TEST(PairwiseDistance, MatchesDirectFormula) {
  const Matrix a = random_points(7, 1);
  const Matrix b = random_points(5, 2);
  const Matrix d = pairwise_sq_dist(a, b);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(d(i, j), (a.row(i) - b.row(j)).squaredNorm(), 1e-12);
  EXPECT_EQ(d, pairwise_sq_dist_serial(a, b));
}

TEST(FarthestPointSampling, HandExample) {
  Matrix p(4, 3);
  p << 0, 0, 0,  //
      1, 0, 0,   //
      10, 0, 0,  //
      4, 0, 0;
  EXPECT_EQ(farthest_point_sampling(p, 4, 0), (std::vector<int>{0, 2, 3, 1}));
  EXPECT_EQ(farthest_point_sampling(p, 2, 2), (std::vector<int>{2, 0}));
}

TEST(FarthestPointSampling, TiesGoToLowestIndex) {
  Matrix p(3, 3);
  p << 0, 0, 0,  //
      1, 0, 0,   //
      -1, 0, 0;
  EXPECT_EQ(farthest_point_sampling(p, 3, 0), (std::vector<int>{0, 1, 2}));
}

TEST(FarthestPointSampling, CyclicWhenCountExceedsPoints) {
  const Matrix p = random_points(3, 4);
  const auto base = farthest_point_sampling(p, 3, 1);
  const auto ext = farthest_point_sampling(p, 7, 1);
  for (int i = 0; i < 7; ++i) EXPECT_EQ(ext[static_cast<std::size_t>(i)], base[static_cast<std::size_t>(i % 3)]);
}

TEST(Knn, SortedByDistanceThenIndex) {
  const Matrix g = grid_points();
  const IndexMatrix nn = knn_search(g, g, 6, true);
  // center of the grid: its six face neighbors are all at distance 1
  EXPECT_EQ(std::vector<int>(nn.row(13).data(), nn.row(13).data() + 6), (std::vector<int>{4, 10, 12, 14, 16, 22}));
  for (int i = 0; i < g.rows(); ++i) {
    for (int j = 0; j < 6; ++j) EXPECT_NE(nn(i, j), i);
  }
}

TEST(Knn, RepeatsWhenShort) {
  Matrix p(3, 3);
  p << 0, 0, 0,  //
      1, 0, 0,   //
      3, 0, 0;
  const IndexMatrix nn = knn_search(p, p, 5, true);
  EXPECT_EQ(std::vector<int>(nn.row(0).data(), nn.row(0).data() + 5), (std::vector<int>{1, 2, 1, 2, 1}));
}

TEST(SerialAndParallel, IdenticalResults) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix p = random_points(200, seed);
    const Matrix q = random_points(40, seed + 100);
    EXPECT_EQ(pairwise_sq_dist(q, p), pairwise_sq_dist_serial(q, p));
    EXPECT_EQ(farthest_point_sampling(p, 64, static_cast<int>(seed)),
              farthest_point_sampling_serial(p, 64, static_cast<int>(seed)));
    EXPECT_EQ(knn_search(q, p, 16, false), knn_search_serial(q, p, 16, false));
    EXPECT_EQ(knn_search(p, p, 8, true), knn_search_serial(p, p, 8, true));
  }
  const Matrix g = grid_points();
  EXPECT_EQ(knn_search(g, g, 10, true), knn_search_serial(g, g, 10, true));
  EXPECT_EQ(farthest_point_sampling(g, 27, 13), farthest_point_sampling_serial(g, 27, 13));
}
