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

// The full tracker network and the tracking-time window preparation.

#include "stmd/backbone.hpp"
#include "stmd/eval.hpp"
#include "stmd/gmlocnet.hpp"
#include "stmd/memory.hpp"
#include "stmd/nn.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace stmd {

/// One backbone window. All coordinates are relative to the reference box
/// (the latest estimate before the frame being tracked).
struct WindowInput {
  std::vector<PointFrame> frames;          // t = window slot
  std::vector<int> frame_ids;              // sequence frame of each slot
  std::vector<Vector3> mask_centers;       // previous-estimate center per slot
  std::vector<double> prev_thetas;
  std::vector<bool> empty_crop;
  Vector3 reference = Vector3::Zero();

  // supervision, filled when the sequence carries ground truth
  std::vector<std::vector<std::uint8_t>> labels;  // per slot, per resampled point
  std::vector<Vector3> gt_centers;
  std::vector<double> gt_thetas;
};

/// Builds the window ending at sequence frame t from estimates of frames
/// 0..t-1. Slot j shows frame max(0, t - L + 1 + j); past frames are cropped
/// around their own estimate, the current frame around estimate t-1.
WindowInput make_window(const SequenceSample& seq, int t, std::span<const Box3D> estimates,
                        const TrackerConfig& cfg, std::uint64_t seed);

struct FrameOutput {
  int slot = 0;
  Matrix coords;
  std::vector<int> source;
  VoteOutput votes;
  ProposalOutput proposals;
};

struct WindowOutput {
  SequenceFeatures features;
  ProtocolOutput memory;
  std::vector<FrameOutput> frames;  // one per backbone output frame
};

class TrackerNet {
 public:
  explicit TrackerNet(const TrackerConfig& cfg);
  TrackerNet(const TrackerNet&) = delete;
  TrackerNet& operator=(const TrackerNet&) = delete;

  /// With `localize_all` false only the last output frame is localized.
  WindowOutput forward(ag::Tape& tape, const WindowInput& input, bool localize_all = true) const;

  const TrackerConfig& config() const { return cfg_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  const BackboneParams& backbone() const { return backbone_; }
  const MemoryParams& memory() const { return memory_; }
  const LocalizationParams& localization() const { return loc_; }

 private:
  TrackerConfig cfg_;
  nn::ParameterSet params_;
  BackboneParams backbone_;
  MemoryParams memory_;
  LocalizationParams loc_;
};

/// Tracks with a trained network; falls back to the previous box whenever
/// the current crop is empty.
class StmdTracker final : public Tracker {
 public:
  explicit StmdTracker(const TrackerNet& net) : net_(net) {}
  Box3D predict(const SequenceSample& seq, int t, std::span<const Box3D> history) const override;

 private:
  const TrackerNet& net_;
};

}  // namespace stmd
