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

// Multi-frame spatio-temporal backbone: per-frame set abstraction and KNN
// edge convolution, a shared pointwise encoder, then a 1D convolution across
// the frame axis applied per point index and channel.

#include "stmd/kernels.hpp"
#include "stmd/nn.hpp"
#include "stmd/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace stmd {

struct FrameFeatures {
  Matrix centers;           // M x 3
  ag::Var feats;            // M x C
  int t = 0;                // frame index the centers come from
  std::vector<int> source;  // input row of each center (empty for padding frames)

  Eigen::Index size() const { return centers.rows(); }
};

using SequenceFeatures = std::vector<FrameFeatures>;

/// Per-edge transform S on [f_i, f_j - f_i, c_j - c_i]: (2C + 3) -> C_m.
struct SpatialKernel {
  nn::Linear edge;
};

/// Taps T_{-r}..T_{r}, each C_m x C', plus one shared bias.
struct TemporalKernel {
  std::vector<ag::Parameter*> taps;
  ag::Parameter* bias = nullptr;

  int size() const { return static_cast<int>(taps.size()); }
};

struct BackboneParams {
  nn::Linear grouping;  // set-abstraction pointwise network, (3 + C_in) -> C
  SpatialKernel spatial;
  nn::Linear encoder;   // C_m -> C_m
  TemporalKernel temporal;

  static BackboneParams create(nn::ParameterSet& ps, const TrackerConfig& cfg, std::mt19937_64& rng);
};

/// FPS picks `m` centers starting at `start_seed % N`; each center's feature is
/// the max over its `neighbors` nearest input points of the grouping network
/// applied to [p_j - c, feat_j].
FrameFeatures set_abstraction(ag::Tape& tape, const PointFrame& frame, int m, int neighbors,
                              std::uint64_t start_seed, const nn::Linear& grouping, Activation act);

/// Row i: the k nearest other centers by (distance, index). Throws when k >= M.
IndexMatrix knn_graph(const Matrix& centers, int k);
IndexMatrix knn_graph_serial(const Matrix& centers, int k);

FrameFeatures edge_conv_spatial(const FrameFeatures& ff, const IndexMatrix& nbr, const SpatialKernel& s,
                                Activation act, Aggregator agg);

/// Pads (kernel-1)/2 frames on both sides; none returns the input.
SequenceFeatures temporal_pad(const SequenceFeatures& seq, PaddingMode mode, int pad);

/// out_j = sum_k X_{j*stride + k} T_k + b over the padded input; output frame j
/// takes its centers from the input frame under the kernel's middle tap.
SequenceFeatures temporal_conv(const SequenceFeatures& padded, const TemporalKernel& kernel, int stride = 1);

/// Full backbone over one window of resampled frames.
SequenceFeatures backbone_forward(ag::Tape& tape, const std::vector<PointFrame>& frames,
                                  const TrackerConfig& cfg, const BackboneParams& params);

}  // namespace stmd
