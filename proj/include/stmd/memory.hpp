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

// Bi-directional cross-frame memory.
//
// propagate (P) cross-attends a frame's features against a memory; update (U)
// predicts a per-point target mask from transformer features and stores a
// mask-gated memory. run_bidirectional_protocol chains them: the first frame
// bootstraps from itself, each middle frame first pulls the future frame
// through the memory and then re-reads the current frame against that
// cross-frame memory, and the last frame is only propagated.

#include "stmd/backbone.hpp"
#include "stmd/nn.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stmd {

using Origin = std::pair<int, int>;

struct MemoryState {
  Matrix coords;         // M x 3
  ag::Var geo_feats;     // M x C'
  ag::Var mask_feats;    // M x C'
  ag::Var mask_logits;   // M x 1
  ag::Var mask_scores;   // M x 1, sigmoid(mask_logits)
  Origin origin{0, 0};
  int frame = 0;         // index into the feature sequence the coords belong to
  std::vector<int> source;

  Eigen::Index size() const { return coords.rows(); }
};

struct TransformerFeatures {
  Matrix coords;
  ag::Var feats;
  Origin origin{0, 0};
  int frame = 0;
  std::vector<int> source;
};

struct TraceRecord {
  char op = 'P';                 // 'P' or 'U'
  int query = 0;                 // frame index fed as query / written
  std::optional<Origin> memory;  // memory argument, absent for the first update
  std::string output;            // e.g. "T(2,0)" or "M(1,1)"

  bool operator==(const TraceRecord&) const = default;
};

struct ProtocolTrace {
  std::vector<TraceRecord> records;

  int count(char op) const;
  /// One JSON object per line: {"op":"P","query":i,"mem":[a,b],"out":"T(i,j)"}.
  std::string to_jsonl() const;
  static ProtocolTrace from_jsonl(const std::string& text);
};

/// Multi-head cross-attention with a learned per-head distance bias
/// b_h(d) = alpha_h * d + beta_h * d^2.
struct AttentionParams {
  nn::Linear query;   // C' -> C'
  nn::Linear key;     // 2C' -> C'
  nn::Linear value;   // 2C' -> C'
  nn::Linear output;  // C' -> C'
  ag::Parameter* distance_bias = nullptr;  // 2 x heads
  int heads = 1;

  static AttentionParams create(nn::ParameterSet& ps, const std::string& name, int width, int heads,
                                std::mt19937_64& rng);
};

struct MemoryParams {
  AttentionParams propagate_attn;
  nn::Linear propagate_ffn1;
  nn::Linear propagate_ffn2;
  AttentionParams update_attn;
  nn::Linear mask_hidden;  // C' -> C_m
  nn::Linear mask_logit;   // C_m -> 1
  nn::Linear mask_value;   // C' -> C'

  static MemoryParams create(nn::ParameterSet& ps, const TrackerConfig& cfg, std::mt19937_64& rng);
};

/// Memory view of a bare frame (geo = frame features, mask features zero,
/// mask scores one); used when the first frame serves as its own memory.
MemoryState memory_from_frame(const FrameFeatures& frame, int index);

ag::Var cross_attention(const ag::Var& queries, const Matrix& query_coords, const MemoryState& memory,
                        const AttentionParams& params);

TransformerFeatures propagate(const FrameFeatures& query, int query_index, const MemoryState& memory,
                              const MemoryParams& params, Origin out_origin);

MemoryState update(const TransformerFeatures& tf, const FrameFeatures& frame, int frame_index,
                   const MemoryState* prev_memory, const MemoryParams& params, Origin out_origin);

struct ProtocolOutput {
  /// Per sequence frame: the features handed to localization.
  std::vector<TransformerFeatures> localization;
  /// Per sequence frame: memory read out for localization. Middle and first
  /// frames reuse the protocol's own update; the last frame gets an extra
  /// update that is not fed back and not traced.
  std::vector<MemoryState> readout;
  /// Every memory the protocol wrote, in order.
  std::vector<MemoryState> written;
  MemoryState final_memory;
  ProtocolTrace trace;
};

ProtocolOutput run_bidirectional_protocol(const SequenceFeatures& seq, const MemoryParams& params);

/// Ablation: each frame reads only the memory of the previous frame.
ProtocolOutput run_last_frame_protocol(const SequenceFeatures& seq, const MemoryParams& params);

ProtocolOutput run_memory(const SequenceFeatures& seq, const MemoryParams& params, MemoryMode mode);

}  // namespace stmd
