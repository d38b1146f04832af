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

// One-pass evaluation: box overlap, center error, Success/Precision AUC and
// the frame-by-frame tracking loop.

#include "stmd/types.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <vector>

namespace stmd {

/// Corners of the box footprint, counter-clockwise.
std::vector<Eigen::Vector2d> bev_corners(const Box3D& box);

/// Area of the intersection of two convex counter-clockwise polygons.
double convex_intersection_area(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& b);

/// Volumetric IoU of yaw-rotated boxes.
double iou3d(const Box3D& a, const Box3D& b);
double center_distance(const Box3D& a, const Box3D& b);

inline constexpr int kThresholdCount = 101;

/// Mean over tau in {0, 0.01, ..., 1} of the fraction with IoU > tau.
double success_auc(std::span<const double> ious);
/// Mean over tau in {0, 0.02, ..., 2} of the fraction with distance <= tau.
double precision_auc(std::span<const double> distances);

/// Fraction-vs-threshold curves behind the two AUCs.
std::vector<double> success_curve(std::span<const double> ious);
std::vector<double> precision_curve(std::span<const double> distances);

struct TrackResult {
  std::vector<Box3D> boxes;
  std::vector<double> ious;
  std::vector<double> distances;
  double success = 0.0;
  double precision = 0.0;

  nlohmann::ordered_json to_json() const;
  /// Throws ParseError on missing or ill-typed fields.
  static TrackResult from_json(const nlohmann::json& j, const std::string& source = "result");
};

/// A tracker predicts frame t from the sequence and its own earlier outputs.
class Tracker {
 public:
  virtual ~Tracker() = default;
  virtual Box3D predict(const SequenceSample& seq, int t, std::span<const Box3D> history) const = 0;
};

/// Returns the ground-truth box; upper bound for the metrics.
class OracleTracker final : public Tracker {
 public:
  Box3D predict(const SequenceSample& seq, int t, std::span<const Box3D> history) const override;
};

/// Repeats the previous prediction, i.e. the frame-0 box forever.
class StaticTracker final : public Tracker {
 public:
  Box3D predict(const SequenceSample& seq, int t, std::span<const Box3D> history) const override;
};

/// Frame 0 is initialized with the ground truth; one prediction per later
/// frame; no resets.
TrackResult run_ope(const Tracker& tracker, const SequenceSample& sample);

struct Summary {
  double success = 0.0;
  double precision = 0.0;
};

/// Frame-weighted means over sequences.
Summary summarize(std::span<const TrackResult> results);

/// run_ope over many sequences on `workers` threads (0 = all cores).
std::vector<TrackResult> run_ope_batch(const Tracker& tracker, std::span<const SequenceSample> samples,
                                       int workers = 0);

}  // namespace stmd
