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

// Gaussian-mask localization: down-weight points far from the previous
// estimate, vote for the target center, keep the top-K votes by objectness,
// refine them into proposals and emit the best box.

#include "stmd/nn.hpp"
#include "stmd/types.hpp"

#include <span>
#include <vector>

namespace stmd {

/// w_i = exp(-|x_i - y|^2 / (2 sigma^2)). Throws ArgumentError for sigma <= 0.
Eigen::VectorXd gaussian_mask(const Matrix& points, const Vector3& center, double sigma);

/// Divide-by-max; returns the input unchanged when the max is not positive.
Eigen::VectorXd normalize_mask(const Eigen::VectorXd& weights);

/// F = w_n * (F_G + F_M), row-wise.
ag::Var fuse_features(const ag::Var& geo, const ag::Var& mask_feats, const Eigen::VectorXd& weights);

struct VoteParams {
  nn::Linear hidden;      // C' -> C_m
  nn::Linear offset;      // C_m -> 3
  nn::Linear feature;     // C_m -> C_m
  nn::Linear objectness;  // C_m -> 1
};

struct VoteOutput {
  ag::Var offsets;            // M x 3
  ag::Var objectness_logits;  // M x 1
  ag::Var objectness;         // M x 1 in [0, 1]
  ag::Var features;           // M x C_m
  Matrix vote_centers;        // coords + offsets

  Eigen::Index size() const { return vote_centers.rows(); }
};

VoteOutput hough_vote(const Matrix& coords, const ag::Var& fused, const VoteParams& params);

/// Indices of the K highest scores after max-normalization, ordered by
/// descending score then ascending index. Throws when K is outside [1, M].
std::vector<int> sample_proposals(std::span<const double> scores, int k);

struct Proposal {
  Vector3 center = Vector3::Zero();
  double theta = 0.0;
  double score = 0.0;
};

struct ProposalParams {
  nn::Linear hidden;  // 2 C_m -> C_m
  nn::Linear out;     // C_m -> 4 (dx, dy, dz, dtheta)
};

struct ProposalOutput {
  std::vector<int> index;   // vote rows used
  ag::Var residuals;        // K x 4
  std::vector<Proposal> proposals;
};

/// Each sampled vote's feature is pooled with the max over all sampled votes
/// and mapped to center and heading residuals; score = normalized objectness.
ProposalOutput proposal_head(const VoteOutput& votes, std::span<const int> sampled, double prev_theta,
                             const ProposalParams& params);

/// Argmax-score proposal with the fixed target size; prev_box when empty.
Box3D select_best(std::span<const Proposal> proposals, const BoxSize& target_size, const Box3D& prev_box);

struct LocalizationParams {
  VoteParams vote;
  ProposalParams proposal;

  static LocalizationParams create(nn::ParameterSet& ps, const TrackerConfig& cfg, std::mt19937_64& rng);
};

}  // namespace stmd
