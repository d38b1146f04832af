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

// Independent reference implementations used as test oracles. They share no
// code with the library beyond plain data types.

#include "stmd/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace stmd::oracle {

/// k nearest other rows by (squared distance, index), by full sort.
inline std::vector<std::vector<int>> brute_knn(const Matrix& pts, int k) {
  const auto n = static_cast<int>(pts.rows());
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> cand;
    for (int j = 0; j < n; ++j) {
      if (j != i) cand.emplace_back((pts.row(i) - pts.row(j)).squaredNorm(), j);
    }
    std::sort(cand.begin(), cand.end());
    for (int q = 0; q < k; ++q) out[static_cast<std::size_t>(i)].push_back(cand[static_cast<std::size_t>(q)].second);
  }
  return out;
}

/// Joint spatio-temporal point convolution with per-tap edge kernels W_k
/// ((2C+3) x C'), linear response and sum over neighbors:
///   out[t][i] = b + sum_k sum_{j in N_{t+k}(i)} [f_i, f_j - f_i, x_j - x_i]_{t+k} W_k
/// over a replicate-padded frame axis.
inline std::vector<Matrix> joint_conv(const std::vector<Matrix>& coords, const std::vector<Matrix>& feats,
                                      const std::vector<Matrix>& kernels, const Eigen::RowVectorXd& bias, int k) {
  const int len = static_cast<int>(coords.size());
  const int taps = static_cast<int>(kernels.size());
  const int r = taps / 2;
  const Eigen::Index n = coords[0].rows();
  const Eigen::Index c = feats[0].cols();
  std::vector<Matrix> out;
  for (int t = 0; t < len; ++t) {
    Matrix o(n, kernels[0].cols());
    for (Eigen::Index i = 0; i < n; ++i) o.row(i) = bias;
    for (int q = 0; q < taps; ++q) {
      const int s = std::clamp(t + q - r, 0, len - 1);
      const auto nbr = brute_knn(coords[static_cast<std::size_t>(s)], k);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (int j : nbr[static_cast<std::size_t>(i)]) {
          Eigen::RowVectorXd e(2 * c + 3);
          e.head(c) = feats[static_cast<std::size_t>(s)].row(i);
          e.segment(c, c) = feats[static_cast<std::size_t>(s)].row(j) - feats[static_cast<std::size_t>(s)].row(i);
          e.tail(3) = coords[static_cast<std::size_t>(s)].row(j) - coords[static_cast<std::size_t>(s)].row(i);
          o.row(i) += e * kernels[static_cast<std::size_t>(q)];
        }
      }
    }
    out.push_back(std::move(o));
  }
  return out;
}

/// IoU of two axis-aligned boxes given by center and (w along y, l along x, h).
inline double axis_aligned_iou(const Box3D& a, const Box3D& b) {
  auto overlap = [](double ca, double ea, double cb, double eb) {
    return std::max(0.0, std::min(ca + ea / 2, cb + eb / 2) - std::max(ca - ea / 2, cb - eb / 2));
  };
  const double ix = overlap(a.center.x(), a.size.l, b.center.x(), b.size.l);
  const double iy = overlap(a.center.y(), a.size.w, b.center.y(), b.size.w);
  const double iz = overlap(a.center.z(), a.size.h, b.center.z(), b.size.h);
  const double inter = ix * iy * iz;
  return inter / (a.volume() + b.volume() - inter);
}

inline bool in_box(const Box3D& b, const Vector3& p) {
  const Vector3 d = p - b.center;
  const double c = std::cos(b.theta), s = std::sin(b.theta);
  const double u = c * d.x() + s * d.y();
  const double v = -s * d.x() + c * d.y();
  return std::abs(u) <= b.size.l / 2 && std::abs(v) <= b.size.w / 2 && std::abs(d.z()) <= b.size.h / 2;
}

/// Monte-Carlo IoU: uniform samples in the joint bounding cube.
inline double monte_carlo_iou(const Box3D& a, const Box3D& b, int samples, std::uint64_t seed) {
  const double ra = std::hypot(a.size.w, a.size.l) / 2, rb = std::hypot(b.size.w, b.size.l) / 2;
  const Vector3 lo(std::min(a.center.x() - ra, b.center.x() - rb), std::min(a.center.y() - ra, b.center.y() - rb),
                   std::min(a.center.z() - a.size.h / 2, b.center.z() - b.size.h / 2));
  const Vector3 hi(std::max(a.center.x() + ra, b.center.x() + rb), std::max(a.center.y() + ra, b.center.y() + rb),
                   std::max(a.center.z() + a.size.h / 2, b.center.z() + b.size.h / 2));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long in_a = 0, in_b = 0, both = 0;
  for (int s = 0; s < samples; ++s) {
    const Vector3 p(lo.x() + (hi.x() - lo.x()) * u(rng), lo.y() + (hi.y() - lo.y()) * u(rng),
                    lo.z() + (hi.z() - lo.z()) * u(rng));
    const bool ia = in_box(a, p), ib = in_box(b, p);
    in_a += ia;
    in_b += ib;
    both += ia && ib;
  }
  const long uni = in_a + in_b - both;
  return uni == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(uni);
}

/// Success AUC by enumerating the 101 thresholds explicitly as integers.
inline double grid_success(const std::vector<double>& ious) {
  long hits = 0;
  for (int k = 0; k <= 100; ++k) {
    for (double v : ious) hits += v > k / 100.0 ? 1 : 0;
  }
  return static_cast<double>(hits) / (101.0 * static_cast<double>(ious.size()));
}

inline double grid_precision(const std::vector<double>& dists) {
  long hits = 0;
  for (int k = 0; k <= 100; ++k) {
    for (double v : dists) hits += v <= 2.0 * k / 100.0 ? 1 : 0;
  }
  return static_cast<double>(hits) / (101.0 * static_cast<double>(dists.size()));
}

}  // namespace stmd::oracle
