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

#include "stmd/backbone.hpp"

#include "stmd/errors.hpp"

namespace stmd {

BackboneParams BackboneParams::create(nn::ParameterSet& ps, const TrackerConfig& cfg,
                                      std::mt19937_64& rng) {
  BackboneParams p;
  const int c = cfg.width_spatial;
  p.grouping = nn::Linear::create(ps, "backbone.grouping", 3 + TrackerConfig::kInputChannels, c, rng);
  p.spatial.edge = nn::Linear::create(ps, "backbone.edge", 2 * c + 3, cfg.width_mid, rng);
  p.encoder = nn::Linear::create(ps, "backbone.encoder", cfg.width_mid, cfg.width_mid, rng);
  const int r = cfg.temporal_kernel / 2;
  for (int k = -r; k <= r; ++k) {
    Matrix w = nn::he_uniform(cfg.width_mid, cfg.width_out, rng) / std::sqrt(double(cfg.temporal_kernel));
    p.temporal.taps.push_back(&ps.add("backbone.temporal.tap" + std::to_string(k + r), std::move(w)));
  }
  p.temporal.bias = &ps.add("backbone.temporal.bias", Matrix::Zero(1, cfg.width_out));
  return p;
}

FrameFeatures set_abstraction(ag::Tape& tape, const PointFrame& frame, int m, int neighbors,
                              std::uint64_t start_seed, const nn::Linear& grouping, Activation act) {
  const auto n = static_cast<int>(frame.size());
  if (n < 1) throw ArgumentError("set_abstraction: empty frame");
  if (m < 1) throw ArgumentError("set_abstraction: M must be >= 1");
  const int c_in = grouping.in() - 3;
  const Eigen::Index have = frame.has_feats() ? frame.feats.cols() : 0;
  if (have != c_in) {
    throw ArgumentError("set_abstraction: frame has " + std::to_string(have) + " feature channels, expected " +
                        std::to_string(c_in));
  }

  FrameFeatures out;
  out.t = frame.t;
  out.source = farthest_point_sampling(frame.coords, m, static_cast<int>(start_seed % static_cast<std::uint64_t>(n)));
  out.centers.resize(m, 3);
  for (int i = 0; i < m; ++i) out.centers.row(i) = frame.coords.row(out.source[i]);

  const IndexMatrix groups = knn_search(out.centers, frame.coords, neighbors, false);
  Matrix grouped(static_cast<Eigen::Index>(m) * neighbors, 3 + c_in);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < neighbors; ++j) {
      const int src = groups(i, j);
      const Eigen::Index row = static_cast<Eigen::Index>(i) * neighbors + j;
      grouped.row(row).head<3>() = frame.coords.row(src) - out.centers.row(i);
      if (c_in > 0) grouped.row(row).tail(c_in) = frame.feats.row(src);
    }
  }
  ag::Var h = ag::activate(grouping(tape, tape.constant(std::move(grouped))), act);
  out.feats = ag::segment_reduce(h, neighbors, Aggregator::kMax);
  return out;
}

IndexMatrix knn_graph(const Matrix& centers, int k) {
  if (k < 1 || k >= centers.rows()) {
    throw ArgumentError("knn_graph: k must satisfy 1 <= k <= M-1 (k=" + std::to_string(k) +
                        ", M=" + std::to_string(centers.rows()) + ")");
  }
  return knn_search(centers, centers, k, true);
}

IndexMatrix knn_graph_serial(const Matrix& centers, int k) {
  if (k < 1 || k >= centers.rows()) throw ArgumentError("knn_graph: k must satisfy 1 <= k <= M-1");
  return knn_search_serial(centers, centers, k, true);
}

FrameFeatures edge_conv_spatial(const FrameFeatures& ff, const IndexMatrix& nbr, const SpatialKernel& s,
                                Activation act, Aggregator agg) {
  const Eigen::Index m = ff.size();
  if (nbr.rows() != m || ff.feats.rows() != m) throw ArgumentError("edge_conv_spatial: shape mismatch");
  const int k = static_cast<int>(nbr.cols());
  const Eigen::Index c = ff.feats.cols();
  if (s.edge.in() != 2 * c + 3) throw ArgumentError("edge_conv_spatial: kernel width mismatch");

  std::vector<int> self_idx(static_cast<std::size_t>(m * k));
  std::vector<int> nbr_idx(static_cast<std::size_t>(m * k));
  Matrix delta(m * k, 3);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (int j = 0; j < k; ++j) {
      const Eigen::Index e = i * k + j;
      const int n = nbr(i, j);
      if (n < 0 || n >= m) throw ArgumentError("edge_conv_spatial: neighbor index out of range");
      self_idx[static_cast<std::size_t>(e)] = static_cast<int>(i);
      nbr_idx[static_cast<std::size_t>(e)] = n;
      delta.row(e) = ff.centers.row(n) - ff.centers.row(i);
    }
  }
  ag::Tape& tape = ff.feats.tape();
  const ag::Var fi = ag::gather_rows(ff.feats, self_idx);
  const ag::Var fj = ag::gather_rows(ff.feats, nbr_idx);
  const ag::Var parts[] = {fi, ag::sub(fj, fi), tape.constant(std::move(delta))};
  const ag::Var edges = ag::activate(s.edge(tape, ag::concat_cols(parts)), act);

  FrameFeatures out;
  out.centers = ff.centers;
  out.t = ff.t;
  out.source = ff.source;
  out.feats = ag::segment_reduce(edges, k, agg);
  return out;
}

SequenceFeatures temporal_pad(const SequenceFeatures& seq, PaddingMode mode, int pad) {
  if (pad < 0) throw ArgumentError("temporal_pad: negative pad");
  if (mode == PaddingMode::kNone || pad == 0 || seq.empty()) return seq;
  auto edge_frame = [&](const FrameFeatures& f) {
    FrameFeatures p;
    p.centers = f.centers;
    p.t = f.t;
    if (mode == PaddingMode::kReplicate) {
      p.feats = f.feats;
      p.source = f.source;
    } else {
      p.feats = f.feats.tape().constant(Matrix::Zero(f.feats.rows(), f.feats.cols()));
    }
    return p;
  };
  SequenceFeatures out;
  for (int i = 0; i < pad; ++i) out.push_back(edge_frame(seq.front()));
  out.insert(out.end(), seq.begin(), seq.end());
  for (int i = 0; i < pad; ++i) out.push_back(edge_frame(seq.back()));
  return out;
}

SequenceFeatures temporal_conv(const SequenceFeatures& padded, const TemporalKernel& kernel, int stride) {
  const int taps = kernel.size();
  if (taps < 1 || taps % 2 == 0) throw ArgumentError("temporal_conv: kernel size must be odd");
  if (stride < 1) throw ArgumentError("temporal_conv: stride must be >= 1");
  const int len = static_cast<int>(padded.size());
  if (len < taps) throw ArgumentError("temporal_conv: sequence shorter than the kernel");
  const Eigen::Index m = padded.front().size();
  const Eigen::Index c = padded.front().feats.cols();
  for (const auto& f : padded) {
    if (f.size() != m || f.feats.rows() != m || f.feats.cols() != c) {
      throw ArgumentError("temporal_conv: frames differ in shape");
    }
  }
  for (const auto* tap : kernel.taps) {
    if (tap->value.rows() != c) throw ArgumentError("temporal_conv: tap width mismatch");
  }

  ag::Tape& tape = padded.front().feats.tape();
  const int r = taps / 2;
  SequenceFeatures out;
  for (int start = 0; start + taps <= len; start += stride) {
    std::vector<ag::Var> terms;
    for (int k = 0; k < taps; ++k) {
      terms.push_back(ag::matmul(padded[start + k].feats, tape.param(*kernel.taps[k])));
    }
    ag::Var acc = terms[0];
    for (int k = 1; k < taps; ++k) acc = ag::add(acc, terms[k]);
    if (kernel.bias != nullptr) acc = ag::add_row(acc, tape.param(*kernel.bias));
    const FrameFeatures& mid = padded[start + r];
    out.push_back(FrameFeatures{mid.centers, acc, mid.t, mid.source});
  }
  return out;
}

SequenceFeatures backbone_forward(ag::Tape& tape, const std::vector<PointFrame>& frames,
                                  const TrackerConfig& cfg, const BackboneParams& params) {
  if (static_cast<int>(frames.size()) != cfg.window) {
    throw ArgumentError("backbone_forward: expected " + std::to_string(cfg.window) + " frames, got " +
                        std::to_string(frames.size()));
  }
  SequenceFeatures spatial;
  spatial.reserve(frames.size());
  for (const auto& frame : frames) {
    FrameFeatures sa = set_abstraction(tape, frame, cfg.centers, cfg.sa_neighbors, cfg.seed, params.grouping,
                                       cfg.activation);
    const IndexMatrix graph = knn_graph(sa.centers, cfg.knn_k);
    FrameFeatures ec = edge_conv_spatial(sa, graph, params.spatial, cfg.activation, cfg.aggregator);
    ec.feats = ag::activate(params.encoder(tape, ec.feats), cfg.activation);
    spatial.push_back(std::move(ec));
  }
  if (!cfg.temporal_enabled) {
    // middle tap only: a pointwise projection with no cross-frame mixing
    TemporalKernel center{{params.temporal.taps[params.temporal.taps.size() / 2]}, params.temporal.bias};
    return temporal_conv(spatial, center, 1);
  }
  const int pad = (params.temporal.size() - 1) / 2;
  return temporal_conv(temporal_pad(spatial, cfg.padding, pad), params.temporal, cfg.temporal_stride);
}

}  // namespace stmd
