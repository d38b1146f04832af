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

#include "stmd/kernels.hpp"

#include "stmd/errors.hpp"
#include "stmd/parallel.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace stmd {

namespace {

inline double sq_dist(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  const double dx = a(i, 0) - b(j, 0);
  const double dy = a(i, 1) - b(j, 1);
  const double dz = a(i, 2) - b(j, 2);
  return dx * dx + dy * dy + dz * dz;
}

void check_xyz(const Matrix& m, const char* what) {
  if (m.cols() != 3) throw ArgumentError(std::string(what) + " must have 3 columns");
}

// (distance, index) strict order
struct Closer {
  const std::vector<double>* d;
  bool operator()(int a, int b) const {
    const double da = (*d)[a];
    const double db = (*d)[b];
    return da < db || (da == db && a < b);
  }
};

void fill_row(IndexMatrix& out, Eigen::Index row, const std::vector<int>& order, int found, int k) {
  for (int j = 0; j < k; ++j) out(row, j) = order[j % found];
}

std::vector<int> cyclic_extend(std::vector<int> order, int count) {
  const int n = static_cast<int>(order.size());
  order.reserve(count);
  for (int i = n; i < count; ++i) order.push_back(order[i % n]);
  return order;
}

}  // namespace

Matrix pairwise_sq_dist(const Matrix& a, const Matrix& b) {
  check_xyz(a, "a");
  check_xyz(b, "b");
  Matrix out(a.rows(), b.rows());
  parallel_for(a.rows(), [&](std::int64_t i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) out(i, j) = sq_dist(a, i, b, j);
  });
  return out;
}

Matrix pairwise_sq_dist_serial(const Matrix& a, const Matrix& b) {
  check_xyz(a, "a");
  check_xyz(b, "b");
  Matrix out(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) out(i, j) = sq_dist(a, i, b, j);
  }
  return out;
}

std::vector<int> farthest_point_sampling_serial(const Matrix& points, int count, int start) {
  check_xyz(points, "points");
  const int n = static_cast<int>(points.rows());
  if (n < 1) throw ArgumentError("farthest_point_sampling: empty point set");
  if (count < 1) throw ArgumentError("farthest_point_sampling: count must be >= 1");
  if (start < 0 || start >= n) throw ArgumentError("farthest_point_sampling: start out of range");
  const int take = std::min(count, n);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<int> order{start};
  order.reserve(count);
  int last = start;
  while (static_cast<int>(order.size()) < take) {
    int arg = -1;
    double far = -1.0;
    for (int i = 0; i < n; ++i) {
      best[i] = std::min(best[i], sq_dist(points, i, points, last));
      if (best[i] > far) {
        far = best[i];
        arg = i;
      }
    }
    order.push_back(arg);
    last = arg;
  }
  return cyclic_extend(std::move(order), count);
}

std::vector<int> farthest_point_sampling(const Matrix& points, int count, int start) {
  check_xyz(points, "points");
  const int n = static_cast<int>(points.rows());
  if (n < 1) throw ArgumentError("farthest_point_sampling: empty point set");
  if (count < 1) throw ArgumentError("farthest_point_sampling: count must be >= 1");
  if (start < 0 || start >= n) throw ArgumentError("farthest_point_sampling: start out of range");
  const int take = std::min(count, n);
  const int threads = max_threads();
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<double> thread_far(threads);
  std::vector<int> thread_arg(threads);
  std::vector<int> order{start};
  order.reserve(count);
  int last = start;
  const int chunk = (n + threads - 1) / threads;
  while (static_cast<int>(order.size()) < take) {
    parallel_for(threads, [&](std::int64_t t) {
      const int lo = static_cast<int>(t) * chunk;
      const int hi = std::min(n, lo + chunk);
      double far = -1.0;
      int arg = -1;
      for (int i = lo; i < hi; ++i) {
        best[i] = std::min(best[i], sq_dist(points, i, points, last));
        if (best[i] > far) {
          far = best[i];
          arg = i;
        }
      }
      thread_far[t] = far;
      thread_arg[t] = arg;
    }, threads);
    // chunks are index-ordered, so a strict > keeps the lowest index on ties
    int arg = -1;
    double far = -1.0;
    for (int t = 0; t < threads; ++t) {
      if (thread_arg[t] >= 0 && thread_far[t] > far) {
        far = thread_far[t];
        arg = thread_arg[t];
      }
    }
    order.push_back(arg);
    last = arg;
  }
  return cyclic_extend(std::move(order), count);
}

IndexMatrix knn_search_serial(const Matrix& queries, const Matrix& points, int k,
                              bool exclude_self) {
  check_xyz(queries, "queries");
  check_xyz(points, "points");
  if (k < 1) throw ArgumentError("knn_search: k must be >= 1");
  if (exclude_self && queries.rows() != points.rows()) {
    throw ArgumentError("knn_search: exclude_self needs queries == points");
  }
  const int n = static_cast<int>(points.rows());
  const int available = exclude_self ? n - 1 : n;
  if (available < 1) throw ArgumentError("knn_search: no candidate neighbors");
  IndexMatrix out(queries.rows(), k);
  std::vector<double> d(n);
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    std::vector<int> order;
    for (int j = 0; j < n; ++j) {
      d[j] = sq_dist(queries, q, points, j);
      if (!(exclude_self && j == q)) order.push_back(j);
    }
    std::sort(order.begin(), order.end(), Closer{&d});
    fill_row(out, q, order, available, k);
  }
  return out;
}

IndexMatrix knn_search(const Matrix& queries, const Matrix& points, int k, bool exclude_self) {
  check_xyz(queries, "queries");
  check_xyz(points, "points");
  if (k < 1) throw ArgumentError("knn_search: k must be >= 1");
  if (exclude_self && queries.rows() != points.rows()) {
    throw ArgumentError("knn_search: exclude_self needs queries == points");
  }
  const int n = static_cast<int>(points.rows());
  const int available = exclude_self ? n - 1 : n;
  if (available < 1) throw ArgumentError("knn_search: no candidate neighbors");
  const int keep = std::min(k, available);
  IndexMatrix out(queries.rows(), k);
  parallel_for(queries.rows(), [&](std::int64_t q) {
    std::vector<double> d(n);
    std::vector<int> order;
    order.reserve(n);
    for (int j = 0; j < n; ++j) {
      d[j] = sq_dist(queries, q, points, j);
      if (!(exclude_self && j == q)) order.push_back(j);
    }
    std::partial_sort(order.begin(), order.begin() + keep, order.end(), Closer{&d});
    fill_row(out, q, order, keep, k);
  });
  return out;
}

}  // namespace stmd
