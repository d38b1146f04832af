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

#include "stmd/model.hpp"

#include "stmd/core_data.hpp"
#include "stmd/errors.hpp"

#include <algorithm>

namespace stmd {

TrackerNet::TrackerNet(const TrackerConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng(mix_seed(cfg_.seed, 0x5EED));
  backbone_ = BackboneParams::create(params_, cfg_, rng);
  memory_ = MemoryParams::create(params_, cfg_, rng);
  loc_ = LocalizationParams::create(params_, cfg_, rng);
  params_.round_to_float();
}

WindowInput make_window(const SequenceSample& seq, int t, std::span<const Box3D> estimates,
                        const TrackerConfig& cfg, std::uint64_t seed) {
  if (t < 1 || t >= static_cast<int>(seq.length())) throw ArgumentError("make_window: t out of range");
  if (static_cast<int>(estimates.size()) < t) throw ArgumentError("make_window: need estimates for 0..t-1");
  const Box3D& ref = estimates[static_cast<std::size_t>(t - 1)];
  WindowInput w;
  w.reference = ref.center;
  const bool supervised = seq.has_labels();
  for (int j = 0; j < cfg.window; ++j) {
    const int a = std::max(0, t - cfg.window + 1 + j);
    const Box3D& around = a < t ? estimates[static_cast<std::size_t>(a)] : ref;
    const Box3D& prev = estimates[static_cast<std::size_t>(std::max(0, a - 1))];
    const CropResult crop = crop_search_region_indexed(seq.frames[static_cast<std::size_t>(a)], around,
                                                       cfg.crop_margin);
    ResampleResult rs = resample_points_indexed(crop.frame, cfg.points,
                                                mix_seed(seed, static_cast<std::uint64_t>(t) * 1000 + j));
    const Vector3 shift = around.center - ref.center;
    rs.frame.coords.rowwise() += shift.transpose();
    rs.frame.t = j;
    // input features are the placeholder flag only
    rs.frame.feats = rs.frame.feats.rightCols(TrackerConfig::kInputChannels).eval();

    w.frame_ids.push_back(a);
    w.empty_crop.push_back(crop.frame.size() == 0);
    w.mask_centers.push_back(prev.center - ref.center);
    w.prev_thetas.push_back(prev.theta);
    w.gt_centers.push_back(seq.gt_boxes[static_cast<std::size_t>(a)].center - ref.center);
    w.gt_thetas.push_back(seq.gt_boxes[static_cast<std::size_t>(a)].theta);
    if (supervised) {
      std::vector<std::uint8_t> lab(static_cast<std::size_t>(cfg.points), 0);
      const auto& src_labels = seq.target_labels[static_cast<std::size_t>(a)];
      for (int i = 0; i < cfg.points; ++i) {
        const int r = rs.source[static_cast<std::size_t>(i)];
        lab[static_cast<std::size_t>(i)] = r >= 0 ? src_labels[static_cast<std::size_t>(crop.source[r])] : 0;
      }
      w.labels.push_back(std::move(lab));
    }
    w.frames.push_back(std::move(rs.frame));
  }
  return w;
}

WindowOutput TrackerNet::forward(ag::Tape& tape, const WindowInput& input, bool localize_all) const {
  WindowOutput out;
  out.features = backbone_forward(tape, input.frames, cfg_, backbone_);
  out.memory = run_memory(out.features, memory_, cfg_.memory);
  const std::size_t n = out.features.size();
  for (std::size_t k = localize_all ? 0 : n - 1; k < n; ++k) {
    const MemoryState& readout = out.memory.readout[k];
    const int slot = out.features[k].t;
    const Eigen::VectorXd weights =
        normalize_mask(gaussian_mask(readout.coords, input.mask_centers[static_cast<std::size_t>(slot)], cfg_.sigma));
    const ag::Var fused = fuse_features(readout.geo_feats, readout.mask_feats, weights);
    FrameOutput fo;
    fo.slot = slot;
    fo.coords = readout.coords;
    fo.source = readout.source;
    fo.votes = hough_vote(readout.coords, fused, loc_.vote);
    const Matrix& obj = fo.votes.objectness.value();
    const std::vector<int> picked =
        sample_proposals(std::span<const double>(obj.data(), static_cast<std::size_t>(obj.size())), cfg_.top_k);
    fo.proposals = proposal_head(fo.votes, picked, input.prev_thetas[static_cast<std::size_t>(slot)], loc_.proposal);
    out.frames.push_back(std::move(fo));
  }
  return out;
}

Box3D StmdTracker::predict(const SequenceSample& seq, int t, std::span<const Box3D> history) const {
  const Box3D& prev = history.back();
  const TrackerConfig& cfg = net_.config();
  const WindowInput window = make_window(seq, t, history, cfg, mix_seed(cfg.seed, 0xE7A1));
  if (window.empty_crop.back()) return prev;
  ag::Tape tape;
  const WindowOutput out = net_.forward(tape, window, false);
  std::vector<Proposal> world = out.frames.back().proposals.proposals;
  for (auto& p : world) p.center += window.reference;
  return select_best(world, seq.target_size, prev);
}

}  // namespace stmd
