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

#include "stmd/eval.hpp"
#include "stmd/model.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace stmd {

struct LossWeights {
  double mask = 1.0;
  double vote = 1.0;
  double objectness = 1.0;
  double box = 1.0;
};

struct TrainConfig {
  int epochs = 12;
  int batch_size = 4;
  double learning_rate = 1e-3;
  double positive_radius = 0.3;  // vote-to-center distance for a positive, m
  LossWeights weights;
  double jitter_center = 0.15;   // simulated tracking error of past estimates, m
  double jitter_theta = 0.05;    // rad
  int eval_every = 4;            // epochs between evaluations (0: only at the end)
  int eval_limit = 0;            // evaluate on at most this many sequences (0: all)
  int workers = 0;               // threads for per-sample gradients (0: all cores)
  std::uint64_t seed = 0;

  void validate() const;
};

struct LossBreakdown {
  ag::Var total;
  double mask = 0.0;
  double vote = 0.0;
  double objectness = 0.0;
  double box = 0.0;
  LossWeights weights;

  double value() const { return total.scalar(); }
};

/// Four-term objective: mask BCE at every memory write, smooth-L1 votes for
/// target points, objectness BCE (positive within `positive_radius` of the
/// center), smooth-L1 center/heading residuals for positive proposals.
LossBreakdown compute_loss(const WindowOutput& out, const WindowInput& in, const TrainConfig& cfg);

/// A training window with jittered past estimates, as seen mid-track.
WindowInput make_training_window(const SequenceSample& seq, int t, const TrackerConfig& tcfg,
                                 const TrainConfig& cfg, std::uint64_t seed);

struct EpochRecord {
  int epoch = 0;
  int step = 0;
  double learning_rate = 0.0;
  double mean_loss = 0.0;
  double mask = 0.0;
  double vote = 0.0;
  double objectness = 0.0;
  double box = 0.0;
  std::optional<Summary> eval;
};

struct TrainOutcome {
  std::vector<double> loss_curve;  // one entry per optimizer step (batch mean)
  std::vector<EpochRecord> history;
  std::vector<double> best_params;
  double best_success = -1.0;
  int steps = 0;
};

/// Adam on the learning-rate schedule lr, lr/2 after half the steps, lr/4
/// after three quarters. Evaluates with run_ope every `eval_every` epochs and
/// leaves the best-by-Success parameters in `net`. Throws NumericError with a
/// description of the offending batch when the loss is not finite.
TrainOutcome train_loop(TrackerNet& net, const TrainConfig& cfg, const std::vector<SequenceSample>& train_set,
                        const std::vector<SequenceSample>& eval_set,
                        const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Repeatedly optimizes one fixed batch; used as an overfitting sanity check.
std::vector<double> overfit_batch(TrackerNet& net, const TrainConfig& cfg, const std::vector<WindowInput>& batch,
                                  int steps);

/// Gradients of one window's loss, summed into `grads` (one matrix per parameter).
double accumulate_gradients(const TrackerNet& net, const WindowInput& window, const TrainConfig& cfg,
                            std::vector<Matrix>& grads);

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  int checked = 0;
};

/// Central differences against the tape gradient for each listed parameter.
/// Relative error is |a - n| / max(|a|, |n|, atol). At most `max_entries`
/// entries per parameter are probed (evenly spaced; 0 = all). Throws
/// NumericError naming the parameter when a gradient is not finite.
GradCheckReport grad_check(const std::function<ag::Var(ag::Tape&)>& fn, const std::vector<ag::Parameter*>& params,
                           double step = 1e-5, int max_entries = 0, double atol = 1e-6);

// Checkpoint file: "STMD", u32 version, u64 parameter count, u64 JSON length,
// JSON {tracker, step, seed}, float32 parameters, u32 CRC-32 of all prior bytes.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::vector<float> params;
  nlohmann::json config;  // tracker config snapshot
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
};

void save_checkpoint(const std::filesystem::path& path, const TrackerNet& net, std::uint64_t step,
                     std::uint64_t seed);
/// Throws ChecksumError for truncated/corrupt files and VersionError when the
/// stored tracker config differs from `expected` or the format version differs.
Checkpoint load_checkpoint(const std::filesystem::path& path, const TrackerConfig& expected);
/// Copies checkpoint parameters into the network.
void apply_checkpoint(TrackerNet& net, const Checkpoint& ckpt);

}  // namespace stmd
