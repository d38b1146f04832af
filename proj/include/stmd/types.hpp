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

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stmd {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector3 = Eigen::Vector3d;

inline constexpr double kPi = 3.14159265358979323846;

/// Maps any angle to [-pi, pi).
double wrap_angle(double theta);

struct BoxSize {
  double w = 1.0;
  double l = 1.0;
  double h = 1.0;

  double max_extent() const;
  bool operator==(const BoxSize&) const = default;
};

/// Oriented box: `l` runs along the heading, `w` across it, `h` along z.
struct Box3D {
  Vector3 center = Vector3::Zero();
  BoxSize size;
  double theta = 0.0;

  /// Validates the size and normalizes theta; throws ArgumentError on w,l,h <= 0.
  static Box3D make(const Vector3& center, const BoxSize& size, double theta);

  double volume() const { return size.w * size.l * size.h; }
};

struct PointFrame {
  Matrix coords = Matrix(0, 3);  // N x 3, meters
  Matrix feats = Matrix(0, 0);   // N x C, or 0 x 0 when absent
  int t = 0;

  Eigen::Index size() const { return coords.rows(); }
  bool has_feats() const { return feats.size() > 0; }
  /// Throws ArgumentError if coords are non-finite or feats rows disagree.
  void validate() const;
};

struct SequenceSample {
  std::vector<PointFrame> frames;
  std::vector<Box3D> gt_boxes;
  BoxSize target_size;
  /// Per frame, per point: 1 for target-surface returns. Empty for real data.
  std::vector<std::vector<std::uint8_t>> target_labels;

  std::size_t length() const { return frames.size(); }
  bool has_labels() const { return !target_labels.empty(); }
  void validate() const;
};

struct ScenarioConfig {
  int num_frames = 8;
  int points_per_frame = 128;
  int num_distractors = 2;
  double min_speed = 0.4;  // m/frame
  double max_speed = 1.2;
  double distractor_min_gap = 0.5;  // clearance between footprint circles, m
  std::map<int, double> occlusion_schedule;
  double noise_sigma = 0.02;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class PaddingMode { kNone, kZero, kReplicate };
enum class MemoryMode { kBidirectional, kLastFrame };
enum class Activation { kRelu, kLinear };
enum class Aggregator { kMax, kSum };

std::string to_string(PaddingMode mode);
std::string to_string(MemoryMode mode);
PaddingMode padding_from_string(const std::string& s);
MemoryMode memory_from_string(const std::string& s);

struct TrackerConfig {
  int window = 8;           // frames per backbone window
  int points = 128;         // points per cropped frame
  int centers = 64;         // set-abstraction centers M
  int sa_neighbors = 16;    // set-abstraction grouping size
  int knn_k = 8;
  int temporal_kernel = 3;
  int temporal_stride = 1;
  PaddingMode padding = PaddingMode::kReplicate;
  bool temporal_enabled = true;
  MemoryMode memory = MemoryMode::kBidirectional;
  double sigma = 2.0;
  int top_k = 16;
  int width_spatial = 32;   // C
  int width_mid = 64;       // C_m
  int width_out = 128;      // C'
  int heads = 4;
  double crop_margin = 2.0;
  Activation activation = Activation::kRelu;
  Aggregator aggregator = Aggregator::kMax;
  std::uint64_t seed = 0;

  void validate() const;
  /// Channels of the per-point input feature (the placeholder flag).
  static constexpr int kInputChannels = 1;
};

}  // namespace stmd
