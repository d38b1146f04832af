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

#include "stmd/memory.hpp"

#include "stmd/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>

namespace stmd {

namespace {

std::string name(char kind, int a, int b) {
  return std::string(1, kind) + "(" + std::to_string(a) + "," + std::to_string(b) + ")";
}

ag::Var head_scalar(ag::Tape& tape, const ag::Parameter& p, int row, int head) {
  const int idx[] = {row};
  return ag::gather_rows(ag::slice_cols(tape.param(p), head, 1), idx);
}

}  // namespace

int ProtocolTrace::count(char op) const {
  int n = 0;
  for (const auto& r : records) n += r.op == op ? 1 : 0;
  return n;
}

std::string ProtocolTrace::to_jsonl() const {
  std::ostringstream out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["op"] = std::string(1, r.op);
    j["query"] = r.query;
    if (r.memory) {
      j["mem"] = {r.memory->first, r.memory->second};
    } else {
      j["mem"] = nullptr;
    }
    j["out"] = r.output;
    out << j.dump() << '\n';
  }
  return out.str();
}

ProtocolTrace ProtocolTrace::from_jsonl(const std::string& text) {
  ProtocolTrace trace;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TraceRecord r;
      const auto op = j.at("op").get<std::string>();
      if (op != "P" && op != "U") throw ParseError("trace", lineno, "op must be P or U");
      r.op = op[0];
      r.query = j.at("query").get<int>();
      if (!j.at("mem").is_null()) r.memory = Origin{j["mem"].at(0).get<int>(), j["mem"].at(1).get<int>()};
      r.output = j.at("out").get<std::string>();
      trace.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("trace", lineno, e.what());
    }
  }
  return trace;
}

AttentionParams AttentionParams::create(nn::ParameterSet& ps, const std::string& name, int width, int heads,
                                        std::mt19937_64& rng) {
  AttentionParams p;
  p.heads = heads;
  p.query = nn::Linear::create(ps, name + ".query", width, width, rng);
  p.key = nn::Linear::create(ps, name + ".key", 2 * width, width, rng);
  p.value = nn::Linear::create(ps, name + ".value", 2 * width, width, rng);
  p.output = nn::Linear::create(ps, name + ".output", width, width, rng);
  // scale the residual branches down so a fresh block starts near identity
  p.query.weight->value *= 0.5;
  p.key.weight->value *= 0.5;
  p.output.weight->value *= 0.25;
  Matrix bias(2, heads);
  bias.row(0).setConstant(-1.0);  // nearer memory points get more weight
  bias.row(1).setZero();
  p.distance_bias = &ps.add(name + ".distance_bias", bias);
  return p;
}

MemoryParams MemoryParams::create(nn::ParameterSet& ps, const TrackerConfig& cfg, std::mt19937_64& rng) {
  MemoryParams p;
  const int w = cfg.width_out;
  p.propagate_attn = AttentionParams::create(ps, "memory.propagate.attn", w, cfg.heads, rng);
  p.propagate_ffn1 = nn::Linear::create(ps, "memory.propagate.ffn1", w, w, rng);
  p.propagate_ffn2 = nn::Linear::create(ps, "memory.propagate.ffn2", w, w, rng);
  p.propagate_ffn2.weight->value *= 0.25;
  p.update_attn = AttentionParams::create(ps, "memory.update.attn", w, cfg.heads, rng);
  p.mask_hidden = nn::Linear::create(ps, "memory.update.mask_hidden", w, cfg.width_mid, rng);
  p.mask_logit = nn::Linear::create(ps, "memory.update.mask_logit", cfg.width_mid, 1, rng);
  p.mask_logit.weight->value *= 0.1;
  p.mask_value = nn::Linear::create(ps, "memory.update.mask_value", w, w, rng);
  return p;
}

MemoryState memory_from_frame(const FrameFeatures& frame, int index) {
  ag::Tape& tape = frame.feats.tape();
  MemoryState m;
  m.coords = frame.centers;
  m.geo_feats = frame.feats;
  m.mask_feats = tape.constant(Matrix::Zero(frame.feats.rows(), frame.feats.cols()));
  m.mask_logits = tape.constant(Matrix::Zero(frame.feats.rows(), 1));
  m.mask_scores = tape.constant(Matrix::Ones(frame.feats.rows(), 1));
  m.origin = {index, index};
  m.frame = index;
  m.source = frame.source;
  return m;
}

ag::Var cross_attention(const ag::Var& queries, const Matrix& query_coords, const MemoryState& memory,
                        const AttentionParams& params) {
  ag::Tape& tape = queries.tape();
  const Eigen::Index width = queries.cols();
  if (params.query.in() != width || memory.geo_feats.cols() != width || memory.mask_feats.cols() != width) {
    throw ArgumentError("cross_attention: feature width mismatch");
  }
  if (query_coords.rows() != queries.rows()) throw ArgumentError("cross_attention: coords/feature rows differ");

  const ag::Var kv_parts[] = {memory.geo_feats, memory.mask_feats};
  const ag::Var kv = ag::concat_cols(kv_parts);
  const ag::Var q = params.query(tape, queries);
  const ag::Var k = params.key(tape, kv);
  const ag::Var v = params.value(tape, kv);

  const Matrix d2 = pairwise_sq_dist(query_coords, memory.coords);
  const ag::Var dist = tape.constant(d2.cwiseSqrt());
  const ag::Var dist2 = tape.constant(d2);

  const int heads = params.heads;
  const Eigen::Index dh = width / heads;
  const double inv = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<ag::Var> outs;
  for (int h = 0; h < heads; ++h) {
    const ag::Var qh = ag::slice_cols(q, h * dh, dh);
    const ag::Var kh = ag::slice_cols(k, h * dh, dh);
    const ag::Var vh = ag::slice_cols(v, h * dh, dh);
    ag::Var logits = ag::scale(ag::matmul(qh, ag::transpose(kh)), inv);
    const ag::Var bias = ag::add(ag::scale_by(dist, head_scalar(tape, *params.distance_bias, 0, h)),
                                 ag::scale_by(dist2, head_scalar(tape, *params.distance_bias, 1, h)));
    logits = ag::add(logits, bias);
    outs.push_back(ag::matmul(ag::softmax_rows(logits), vh));
  }
  return params.output(tape, heads == 1 ? outs[0] : ag::concat_cols(outs));
}

TransformerFeatures propagate(const FrameFeatures& query, int query_index, const MemoryState& memory,
                              const MemoryParams& params, Origin out_origin) {
  ag::Tape& tape = query.feats.tape();
  if (query.feats.cols() != params.propagate_attn.query.in()) {
    throw ArgumentError("propagate: query width " + std::to_string(query.feats.cols()) +
                        " does not match parameters");
  }
  const ag::Var attended =
      ag::add(query.feats, cross_attention(query.feats, query.centers, memory, params.propagate_attn));
  const ag::Var ffn = params.propagate_ffn2(tape, ag::relu(params.propagate_ffn1(tape, attended)));
  TransformerFeatures out;
  out.coords = query.centers;
  out.feats = ag::add(attended, ffn);
  out.origin = out_origin;
  out.frame = query_index;
  out.source = query.source;
  return out;
}

MemoryState update(const TransformerFeatures& tf, const FrameFeatures& frame, int frame_index,
                   const MemoryState* prev_memory, const MemoryParams& params, Origin out_origin) {
  if (tf.coords.rows() != frame.centers.rows() || tf.coords != frame.centers) {
    throw ArgumentError("update: transformer features and frame have different coordinates");
  }
  if (tf.feats.cols() != frame.feats.cols()) throw ArgumentError("update: feature width mismatch");
  ag::Tape& tape = tf.feats.tape();
  ag::Var h = ag::add(tf.feats, frame.feats);
  if (prev_memory != nullptr) {
    h = ag::add(h, cross_attention(h, tf.coords, *prev_memory, params.update_attn));
  }
  MemoryState m;
  m.coords = frame.centers;
  m.geo_feats = tf.feats;
  m.mask_logits = params.mask_logit(tape, ag::relu(params.mask_hidden(tape, h)));
  m.mask_scores = ag::sigmoid(m.mask_logits);
  m.mask_feats = ag::scale_rows(ag::relu(params.mask_value(tape, h)), m.mask_scores);
  m.origin = out_origin;
  m.frame = frame_index;
  m.source = frame.source;
  return m;
}

ProtocolOutput run_bidirectional_protocol(const SequenceFeatures& seq, const MemoryParams& params) {
  const int len = static_cast<int>(seq.size());
  if (len < 2) throw ArgumentError("run_bidirectional_protocol: need at least 2 frames");
  ProtocolOutput out;
  out.localization.resize(len);
  out.readout.resize(len);
  auto& trace = out.trace.records;

  // i = 0: the first frame stands in for its own future and memory
  const MemoryState self = memory_from_frame(seq[0], 0);
  TransformerFeatures t00 = propagate(seq[0], 0, self, params, {0, 0});
  trace.push_back({'P', 0, Origin{0, 0}, name('T', 0, 0)});
  MemoryState memory = update(t00, seq[0], 0, nullptr, params, {0, 0});
  trace.push_back({'U', 0, std::nullopt, name('M', 0, 0)});
  out.written.push_back(memory);
  out.localization[0] = t00;
  out.readout[0] = memory;

  for (int i = 1; i < len - 1; ++i) {
    const Origin prev = memory.origin;
    // future frame through the synthetic past memory
    TransformerFeatures future = propagate(seq[i + 1], i + 1, memory, params, {i + 1, i - 1});
    trace.push_back({'P', i + 1, prev, name('T', i + 1, i - 1)});
    MemoryState cross = update(future, seq[i + 1], i + 1, &memory, params, {i + 1, i - 1});
    trace.push_back({'U', i + 1, prev, name('M', i + 1, i - 1)});
    out.written.push_back(cross);
    // current frame against the cross-frame memory, then the backward update
    TransformerFeatures current = propagate(seq[i], i, cross, params, {i, i});
    trace.push_back({'P', i, cross.origin, name('T', i, i)});
    MemoryState next = update(current, seq[i], i, &memory, params, {i, i});
    trace.push_back({'U', i, prev, name('M', i, i)});
    out.written.push_back(next);
    out.localization[i] = current;
    out.readout[i] = next;
    memory = std::move(next);
  }

  const int last = len - 1;
  TransformerFeatures tail = propagate(seq[last], last, memory, params, {last, last - 1});
  trace.push_back({'P', last, memory.origin, name('T', last, last - 1)});
  out.readout[last] = update(tail, seq[last], last, &memory, params, {last, last - 1});
  out.localization[last] = std::move(tail);
  out.final_memory = std::move(memory);
  return out;
}

ProtocolOutput run_last_frame_protocol(const SequenceFeatures& seq, const MemoryParams& params) {
  const int len = static_cast<int>(seq.size());
  if (len < 2) throw ArgumentError("run_last_frame_protocol: need at least 2 frames");
  ProtocolOutput out;
  out.localization.resize(len);
  out.readout.resize(len);
  auto& trace = out.trace.records;

  const MemoryState self = memory_from_frame(seq[0], 0);
  TransformerFeatures t00 = propagate(seq[0], 0, self, params, {0, 0});
  trace.push_back({'P', 0, Origin{0, 0}, name('T', 0, 0)});
  MemoryState memory = update(t00, seq[0], 0, nullptr, params, {0, 0});
  trace.push_back({'U', 0, std::nullopt, name('M', 0, 0)});
  out.written.push_back(memory);
  out.localization[0] = t00;
  out.readout[0] = memory;

  for (int i = 1; i < len; ++i) {
    const Origin prev = memory.origin;
    TransformerFeatures current = propagate(seq[i], i, memory, params, {i, i - 1});
    trace.push_back({'P', i, prev, name('T', i, i - 1)});
    MemoryState next = update(current, seq[i], i, &memory, params, {i, i});
    if (i < len - 1) {
      trace.push_back({'U', i, prev, name('M', i, i)});
      out.written.push_back(next);
    }
    out.localization[i] = std::move(current);
    out.readout[i] = next;
    if (i < len - 1) memory = std::move(next);
  }
  out.final_memory = std::move(memory);
  return out;
}

ProtocolOutput run_memory(const SequenceFeatures& seq, const MemoryParams& params, MemoryMode mode) {
  return mode == MemoryMode::kBidirectional ? run_bidirectional_protocol(seq, params)
                                            : run_last_frame_protocol(seq, params);
}

}  // namespace stmd
