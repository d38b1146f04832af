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

#include "stmd/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stmd {

/// Synthesizes a tracking episode: a rigid box target whose surface shell is
/// sampled every frame while it moves along a smooth random trajectory, plus
/// similar-sized distractors and background clutter. Each frame is resampled
/// to exactly `points_per_frame` points. Pure function of `cfg`.
SequenceSample generate_synthetic_sequence(const ScenarioConfig& cfg);

/// Writes meta.json, frame_###.xyz, frame_###.labels (when labels exist) and boxes.csv.
void write_sequence_dir(const SequenceSample& sample, const std::filesystem::path& dir);
/// Throws ParseError naming the offending file and line.
SequenceSample read_sequence_dir(const std::filesystem::path& dir);

/// Reads one KITTI velodyne record file (little-endian float32 x,y,z,intensity)
/// and maps a KITTI label line, already split on whitespace, to a box.
/// Accepts the 15-field object format and the 17-field tracking format; the
/// box stays in the label's own coordinate frame (no calibration applied).
struct KittiFrame {
  PointFrame frame;
  Box3D box;
};
KittiFrame read_kitti_frame(const std::filesystem::path& bin_path,
                            const std::vector<std::string>& label_fields);
PointFrame read_kitti_points(const std::filesystem::path& bin_path);

struct CropResult {
  PointFrame frame;
  std::vector<int> source;  // input row of every kept point
};

/// Keeps points within the cube of half-extent max(w,l,h)/2 + margin around
/// the box center (inclusive), re-centered on that center.
PointFrame crop_search_region(const PointFrame& frame, const Box3D& prev_box, double margin);
CropResult crop_search_region_indexed(const PointFrame& frame, const Box3D& prev_box,
                                      double margin);

struct ResampleResult {
  PointFrame frame;
  std::vector<int> source;  // input row, or -1 for placeholder points
};

/// Fixed-size resampling. The output always carries the input features plus a
/// trailing flag channel that is 1 only for placeholder origin points.
PointFrame resample_points(const PointFrame& frame, int n, std::uint64_t seed);
ResampleResult resample_points_indexed(const PointFrame& frame, int n, std::uint64_t seed);

/// Seed mixing for per-item streams derived from a base seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace stmd
