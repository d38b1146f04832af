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

#include "stmd/gmlocnet.hpp"

#include "stmd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stmd {

Eigen::VectorXd gaussian_mask(const Matrix& points, const Vector3& center, double sigma) {
  if (!(sigma > 0.0)) throw ArgumentError("gaussian_mask: sigma must be > 0");
  if (points.cols() != 3) throw ArgumentError("gaussian_mask: points must be M x 3");
  Eigen::VectorXd w(points.rows());
  const double denom = 2.0 * sigma * sigma;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    w(i) = std::exp(-(points.row(i).transpose() - center).squaredNorm() / denom);
  }
  return w;
}

Eigen::VectorXd normalize_mask(const Eigen::VectorXd& weights) {
  if (weights.size() == 0) return weights;
  const double top = weights.maxCoeff();
  if (!(top > 0.0)) return weights;
  return weights / top;
}

ag::Var fuse_features(const ag::Var& geo, const ag::Var& mask_feats, const Eigen::VectorXd& weights) {
  if (geo.rows() != mask_feats.rows() || geo.cols() != mask_feats.cols() || weights.size() != geo.rows()) {
    throw ArgumentError("fuse_features: shape mismatch");
  }
  Matrix w = weights;
  return ag::scale_rows(ag::add(geo, mask_feats), geo.tape().constant(std::move(w)));
}

VoteOutput hough_vote(const Matrix& coords, const ag::Var& fused, const VoteParams& params) {
  if (coords.rows() != fused.rows() || coords.cols() != 3) throw ArgumentError("hough_vote: shape mismatch");
  ag::Tape& tape = fused.tape();
  const ag::Var h = ag::relu(params.hidden(tape, fused));
  VoteOutput out;
  out.offsets = params.offset(tape, h);
  out.features = ag::relu(params.feature(tape, h));
  out.objectness_logits = params.objectness(tape, out.features);
  out.objectness = ag::sigmoid(out.objectness_logits);
  out.vote_centers = coords + out.offsets.value();
  return out;
}

std::vector<int> sample_proposals(std::span<const double> scores, int k) {
  const int m = static_cast<int>(scores.size());
  if (k < 1 || k > m) {
    throw ArgumentError("sample_proposals: K=" + std::to_string(k) + " outside [1, " + std::to_string(m) + "]");
  }
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> s(scores.begin(), scores.end());
  if (top > 0.0) {
    for (double& v : s) v /= top;
  }
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                    [&](int a, int b) { return s[a] > s[b] || (s[a] == s[b] && a < b); });
  idx.resize(k);
  return idx;
}

ProposalOutput proposal_head(const VoteOutput& votes, std::span<const int> sampled, double prev_theta,
                             const ProposalParams& params) {
  if (sampled.empty()) throw ArgumentError("proposal_head: no sampled votes (fall back to the previous box)");
  ag::Tape& tape = votes.features.tape();
  const ag::Var own = ag::gather_rows(votes.features, sampled);
  const int k = static_cast<int>(sampled.size());
  const ag::Var pooled = ag::segment_reduce(own, k, Aggregator::kMax);
  std::vector<int> zeros(static_cast<std::size_t>(k), 0);
  const ag::Var parts[] = {own, ag::gather_rows(pooled, zeros)};
  ProposalOutput out;
  out.index.assign(sampled.begin(), sampled.end());
  out.residuals = params.out(tape, ag::relu(params.hidden(tape, ag::concat_cols(parts))));

  const Matrix& res = out.residuals.value();
  const Matrix& obj = votes.objectness.value();
  double top = 0.0;
  for (int i : sampled) top = std::max(top, obj(i, 0));
  for (int r = 0; r < k; ++r) {
    const int i = sampled[static_cast<std::size_t>(r)];
    Proposal p;
    p.center = votes.vote_centers.row(i).transpose() + res.row(r).head<3>().transpose();
    p.theta = wrap_angle(prev_theta + res(r, 3));
    p.score = top > 0.0 ? obj(i, 0) / top : obj(i, 0);
    out.proposals.push_back(p);
  }
  return out;
}

Box3D select_best(std::span<const Proposal> proposals, const BoxSize& target_size, const Box3D& prev_box) {
  if (proposals.empty()) return prev_box;
  std::size_t best = 0;
  for (std::size_t i = 1; i < proposals.size(); ++i) {
    if (proposals[i].score > proposals[best].score) best = i;
  }
  return Box3D::make(proposals[best].center, target_size, proposals[best].theta);
}

LocalizationParams LocalizationParams::create(nn::ParameterSet& ps, const TrackerConfig& cfg,
                                              std::mt19937_64& rng) {
  LocalizationParams p;
  const int mid = cfg.width_mid;
  p.vote.hidden = nn::Linear::create(ps, "loc.vote.hidden", cfg.width_out, mid, rng);
  p.vote.offset = nn::Linear::create(ps, "loc.vote.offset", mid, 3, rng);
  p.vote.offset.weight->value *= 0.1;
  p.vote.feature = nn::Linear::create(ps, "loc.vote.feature", mid, mid, rng);
  p.vote.objectness = nn::Linear::create(ps, "loc.vote.objectness", mid, 1, rng);
  p.vote.objectness.weight->value *= 0.1;
  p.proposal.hidden = nn::Linear::create(ps, "loc.proposal.hidden", 2 * mid, mid, rng);
  p.proposal.out = nn::Linear::create(ps, "loc.proposal.out", mid, 4, rng);
  p.proposal.out.weight->value *= 0.1;
  return p;
}

}  // namespace stmd
