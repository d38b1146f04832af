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

#include "stmd/core_data.hpp"

#include "stmd/errors.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace stmd {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CropResult crop_search_region_indexed(const PointFrame& frame, const Box3D& prev_box,
                                      double margin) {
  if (!(margin >= 0.0)) throw ArgumentError("crop margin must be >= 0");
  const double half = prev_box.size.max_extent() / 2.0 + margin;
  CropResult out;
  for (Eigen::Index i = 0; i < frame.size(); ++i) {
    const Vector3 d = frame.coords.row(i).transpose() - prev_box.center;
    if (d.cwiseAbs().maxCoeff() <= half) out.source.push_back(static_cast<int>(i));
  }
  const auto n = static_cast<Eigen::Index>(out.source.size());
  out.frame.t = frame.t;
  out.frame.coords.resize(n, 3);
  if (frame.has_feats()) out.frame.feats.resize(n, frame.feats.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    const int src = out.source[static_cast<std::size_t>(r)];
    out.frame.coords.row(r) = frame.coords.row(src) - prev_box.center.transpose();
    if (frame.has_feats()) out.frame.feats.row(r) = frame.feats.row(src);
  }
  return out;
}

PointFrame crop_search_region(const PointFrame& frame, const Box3D& prev_box, double margin) {
  return crop_search_region_indexed(frame, prev_box, margin).frame;
}

ResampleResult resample_points_indexed(const PointFrame& frame, int n, std::uint64_t seed) {
  if (n <= 0) throw ArgumentError("resample_points: N must be >= 1");
  const auto in = static_cast<int>(frame.size());
  std::mt19937_64 rng(seed);
  ResampleResult out;
  if (in >= n) {
    // partial Fisher-Yates: first n entries are a uniform draw without replacement
    std::vector<int> perm(in);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 0; i < n; ++i) {
      std::uniform_int_distribution<int> pick(i, in - 1);
      std::swap(perm[i], perm[pick(rng)]);
    }
    out.source.assign(perm.begin(), perm.begin() + n);
  } else if (in > 0) {
    out.source.resize(n);
    std::iota(out.source.begin(), out.source.begin() + in, 0);
    std::uniform_int_distribution<int> pick(0, in - 1);
    for (int i = in; i < n; ++i) out.source[i] = pick(rng);
  } else {
    out.source.assign(n, -1);
  }

  const Eigen::Index feat_in = frame.has_feats() ? frame.feats.cols() : 0;
  out.frame.t = frame.t;
  out.frame.coords = Matrix::Zero(n, 3);
  out.frame.feats = Matrix::Zero(n, feat_in + 1);
  for (int r = 0; r < n; ++r) {
    const int src = out.source[r];
    if (src < 0) {
      out.frame.feats(r, feat_in) = 1.0;
      continue;
    }
    out.frame.coords.row(r) = frame.coords.row(src);
    if (feat_in > 0) out.frame.feats.row(r).head(feat_in) = frame.feats.row(src);
  }
  return out;
}

PointFrame resample_points(const PointFrame& frame, int n, std::uint64_t seed) {
  return resample_points_indexed(frame, n, seed).frame;
}

}  // namespace stmd
