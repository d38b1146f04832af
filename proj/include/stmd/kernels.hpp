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

#pragma once

// Geometric kernels used by the backbone. Each kernel has an OpenMP version
// and a `_serial` reference; tests require identical results from both.

#include "stmd/types.hpp"

#include <cstdint>
#include <vector>

namespace stmd {

using IndexMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Squared Euclidean distances between rows of a (n x 3) and b (m x 3).
Matrix pairwise_sq_dist(const Matrix& a, const Matrix& b);
Matrix pairwise_sq_dist_serial(const Matrix& a, const Matrix& b);

/// Farthest-point sampling of `count` indices starting at `start`. Ties go to
/// the lowest index. When count exceeds the point count, the full FPS order is
/// repeated cyclically.
std::vector<int> farthest_point_sampling(const Matrix& points, int count, int start);
std::vector<int> farthest_point_sampling_serial(const Matrix& points, int count, int start);

/// For each query row, the k nearest rows of `points` sorted by (distance,
/// index). With `exclude_self`, queries and points must be the same set and
/// row i never lists i. When fewer than k candidates exist, the found
/// neighbors repeat cyclically.
IndexMatrix knn_search(const Matrix& queries, const Matrix& points, int k, bool exclude_self);
IndexMatrix knn_search_serial(const Matrix& queries, const Matrix& points, int k,
                              bool exclude_self);

}  // namespace stmd
