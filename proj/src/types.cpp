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

#include "stmd/types.hpp"

#include "stmd/errors.hpp"

#include <algorithm>
#include <cmath>

namespace stmd {

double wrap_angle(double theta) {
  double r = std::fmod(theta + kPi, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  r -= kPi;
  // fmod rounding can land exactly on +pi
  if (r >= kPi) r -= 2.0 * kPi;
  return r;
}

double BoxSize::max_extent() const { return std::max({w, l, h}); }

Box3D Box3D::make(const Vector3& center, const BoxSize& size, double theta) {
  if (!(size.w > 0.0 && size.l > 0.0 && size.h > 0.0)) {
    throw ArgumentError("box size must be positive");
  }
  if (!center.allFinite() || !std::isfinite(theta)) {
    throw ArgumentError("box center and heading must be finite");
  }
  return Box3D{center, size, wrap_angle(theta)};
}

void PointFrame::validate() const {
  if (coords.cols() != 3) throw ArgumentError("PointFrame coords must be N x 3");
  if (!coords.allFinite()) throw ArgumentError("PointFrame coords must be finite");
  if (has_feats() && feats.rows() != coords.rows()) {
    throw ArgumentError("PointFrame feats row count must equal N");
  }
  if (t < 0) throw ArgumentError("PointFrame frame index must be >= 0");
}

void SequenceSample::validate() const {
  if (frames.size() < 2) throw ArgumentError("sequence needs at least 2 frames");
  if (frames.size() != gt_boxes.size()) {
    throw ArgumentError("frame count and box count differ");
  }
  if (!(gt_boxes.front().size == target_size)) {
    throw ArgumentError("target_size must equal the first box size");
  }
  for (const auto& f : frames) f.validate();
  if (has_labels()) {
    if (target_labels.size() != frames.size()) throw ArgumentError("label count mismatch");
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (static_cast<Eigen::Index>(target_labels[i].size()) != frames[i].size()) {
        throw ArgumentError("label length mismatch in frame " + std::to_string(i));
      }
    }
  }
}

void ScenarioConfig::validate() const {
  if (num_frames < 2) throw ConfigError("scenario.num_frames must be >= 2");
  if (points_per_frame < 1) throw ConfigError("scenario.points_per_frame must be >= 1");
  if (num_distractors < 0) throw ConfigError("scenario.num_distractors must be >= 0");
  if (!(min_speed >= 0.0 && max_speed >= min_speed)) {
    throw ConfigError("scenario speed range must be nonempty and nonnegative");
  }
  if (!(distractor_min_gap >= 0.0)) throw ConfigError("scenario.distractor_min_gap must be >= 0");
  if (!(noise_sigma >= 0.0)) throw ConfigError("scenario.noise_sigma must be >= 0");
  for (const auto& [frame, fraction] : occlusion_schedule) {
    if (frame < 0 || frame >= num_frames) {
      throw ConfigError("occlusion schedule names frame " + std::to_string(frame) +
                        " outside the sequence");
    }
    if (!(fraction >= 0.0 && fraction <= 1.0)) {
      throw ConfigError("occlusion fractions must lie in [0, 1]");
    }
  }
}

std::string to_string(PaddingMode mode) {
  switch (mode) {
    case PaddingMode::kNone: return "none";
    case PaddingMode::kZero: return "zero";
    case PaddingMode::kReplicate: return "replicate";
  }
  return "?";
}

std::string to_string(MemoryMode mode) {
  return mode == MemoryMode::kBidirectional ? "bidirectional" : "last_frame";
}

PaddingMode padding_from_string(const std::string& s) {
  if (s == "none") return PaddingMode::kNone;
  if (s == "zero") return PaddingMode::kZero;
  if (s == "replicate") return PaddingMode::kReplicate;
  throw ConfigError("unknown padding mode '" + s + "'");
}

MemoryMode memory_from_string(const std::string& s) {
  if (s == "bidirectional") return MemoryMode::kBidirectional;
  if (s == "last_frame") return MemoryMode::kLastFrame;
  throw ConfigError("unknown memory mode '" + s + "'");
}

void TrackerConfig::validate() const {
  if (window < 2) throw ConfigError("tracker.window must be >= 2");
  if (points < 1) throw ConfigError("tracker.points must be >= 1");
  if (centers < 2) throw ConfigError("tracker.centers must be >= 2");
  if (sa_neighbors < 1) throw ConfigError("tracker.sa_neighbors must be >= 1");
  if (knn_k < 1 || knn_k > centers - 1) throw ConfigError("tracker.knn_k must be in [1, centers-1]");
  if (temporal_kernel < 1 || temporal_kernel % 2 == 0) {
    throw ConfigError("tracker.temporal_kernel must be odd");
  }
  if (temporal_stride != 1) throw ConfigError("tracker.temporal_stride must be 1");
  if (padding == PaddingMode::kNone && temporal_enabled && window - (temporal_kernel - 1) < 1) {
    throw ConfigError("window too short for unpadded temporal convolution");
  }
  if (!(sigma > 0.0)) throw ConfigError("tracker.sigma must be > 0");
  if (top_k < 1 || top_k > points || top_k > centers) {
    throw ConfigError("tracker.top_k must be in [1, min(points, centers)]");
  }
  if (width_spatial < 1 || width_mid < 1 || width_out < 1) {
    throw ConfigError("feature widths must be positive");
  }
  if (heads < 1 || width_out % heads != 0) {
    throw ConfigError("tracker.heads must divide tracker.width_out");
  }
  if (!(crop_margin >= 0.0)) throw ConfigError("tracker.crop_margin must be >= 0");
}

}  // namespace stmd
