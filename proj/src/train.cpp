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

#include "stmd/train.hpp"

#include "stmd/core_data.hpp"
#include "stmd/errors.hpp"
#include "stmd/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace stmd {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (!(positive_radius > 0.0)) throw ConfigError("train.positive_radius must be > 0");
  if (weights.mask < 0 || weights.vote < 0 || weights.objectness < 0 || weights.box < 0) {
    throw ConfigError("train.weights must be >= 0");
  }
  if (jitter_center < 0 || jitter_theta < 0) throw ConfigError("train jitter must be >= 0");
  if (eval_every < 0 || eval_limit < 0 || workers < 0) throw ConfigError("train counts must be >= 0");
}

namespace {

Matrix ones(Eigen::Index n) { return Matrix::Ones(n, 1); }

// Per-center target membership for a memory or frame output.
Matrix member_targets(const std::vector<std::uint8_t>& labels, const std::vector<int>& source, Eigen::Index n) {
  Matrix y = Matrix::Zero(n, 1);
  if (labels.empty()) return y;
  for (Eigen::Index i = 0; i < n && i < static_cast<Eigen::Index>(source.size()); ++i) {
    const int r = source[static_cast<std::size_t>(i)];
    if (r >= 0) y(i, 0) = labels[static_cast<std::size_t>(r)];
  }
  return y;
}

}  // namespace

LossBreakdown compute_loss(const WindowOutput& out, const WindowInput& in, const TrainConfig& cfg) {
  if (out.frames.empty()) throw ArgumentError("compute_loss: no localized frames");
  if (in.labels.size() != in.frames.size()) throw ArgumentError("compute_loss: window has no labels");
  ag::Tape& tape = out.frames.front().votes.offsets.tape();

  // mask: every written memory plus the last frame's readout
  std::vector<const MemoryState*> masks;
  for (const auto& m : out.memory.written) masks.push_back(&m);
  if (!out.memory.readout.empty()) {
    const MemoryState& last = out.memory.readout.back();
    if (out.memory.written.empty() || last.mask_logits.id() != out.memory.written.back().mask_logits.id()) {
      masks.push_back(&last);
    }
  }
  std::vector<ag::Var> mask_terms;
  for (const MemoryState* m : masks) {
    const int slot = out.features[static_cast<std::size_t>(m->frame)].t;
    const Matrix y = member_targets(in.labels[static_cast<std::size_t>(slot)], m->source, m->size());
    mask_terms.push_back(ag::bce_with_logits(m->mask_logits, y, ones(m->size())));
  }

  std::vector<ag::Var> vote_terms, obj_terms, box_terms;
  for (const FrameOutput& fo : out.frames) {
    const auto s = static_cast<std::size_t>(fo.slot);
    const Vector3 gt = in.gt_centers[s];
    const Eigen::Index m = fo.coords.rows();

    const Matrix member = member_targets(in.labels[s], fo.source, m);
    Matrix offset_target = (-fo.coords).rowwise() + gt.transpose();
    vote_terms.push_back(ag::smooth_l1(fo.votes.offsets, offset_target, member));

    Matrix positive = Matrix::Zero(m, 1);
    for (Eigen::Index i = 0; i < m; ++i) {
      if ((fo.votes.vote_centers.row(i).transpose() - gt).norm() < cfg.positive_radius) positive(i, 0) = 1.0;
    }
    obj_terms.push_back(ag::bce_with_logits(fo.votes.objectness_logits, positive, ones(m)));

    const auto& idx = fo.proposals.index;
    const auto k = static_cast<Eigen::Index>(idx.size());
    Matrix box_target = Matrix::Zero(k, 4);
    Matrix box_w = Matrix::Zero(k, 1);
    for (Eigen::Index r = 0; r < k; ++r) {
      const int i = idx[static_cast<std::size_t>(r)];
      box_w(r, 0) = positive(i, 0);
      box_target.block(r, 0, 1, 3) = (gt - fo.votes.vote_centers.row(i).transpose()).transpose();
      box_target(r, 3) = wrap_angle(in.gt_thetas[s] - in.prev_thetas[s]);
    }
    box_terms.push_back(ag::smooth_l1(fo.proposals.residuals, box_target, box_w));
  }

  auto mean = [&](const std::vector<ag::Var>& terms) {
    return ag::scale(ag::add_scalars(terms), 1.0 / static_cast<double>(terms.size()));
  };
  LossBreakdown lb;
  lb.weights = cfg.weights;
  const ag::Var mask = mask_terms.empty() ? tape.constant(Matrix::Zero(1, 1)) : mean(mask_terms);
  const ag::Var vote = mean(vote_terms);
  const ag::Var obj = mean(obj_terms);
  const ag::Var box = mean(box_terms);
  lb.mask = mask.scalar();
  lb.vote = vote.scalar();
  lb.objectness = obj.scalar();
  lb.box = box.scalar();
  const ag::Var weighted[] = {ag::scale(mask, cfg.weights.mask), ag::scale(vote, cfg.weights.vote),
                              ag::scale(obj, cfg.weights.objectness), ag::scale(box, cfg.weights.box)};
  lb.total = ag::add_scalars(weighted);
  return lb;
}

WindowInput make_training_window(const SequenceSample& seq, int t, const TrackerConfig& tcfg,
                                 const TrainConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed, 0x7A1));
  std::normal_distribution<double> center_noise(0.0, cfg.jitter_center);
  std::normal_distribution<double> theta_noise(0.0, cfg.jitter_theta);
  std::vector<Box3D> estimates(seq.gt_boxes.begin(), seq.gt_boxes.begin() + t);
  for (std::size_t i = 1; i < estimates.size(); ++i) {
    Box3D& b = estimates[i];
    if (cfg.jitter_center > 0) {
      b.center.x() += center_noise(rng);
      b.center.y() += center_noise(rng);
    }
    if (cfg.jitter_theta > 0) b.theta = wrap_angle(b.theta + theta_noise(rng));
  }
  return make_window(seq, t, estimates, tcfg, mix_seed(seed, 0x3D));
}

namespace {

struct SampleResult {
  double total = 0.0;
  double mask = 0.0;
  double vote = 0.0;
  double objectness = 0.0;
  double box = 0.0;
};

SampleResult sample_gradients(const TrackerNet& net, const WindowInput& window, const TrainConfig& cfg,
                              std::vector<Matrix>& grads) {
  ag::Tape tape;
  const WindowOutput out = net.forward(tape, window, true);
  const LossBreakdown lb = compute_loss(out, window, cfg);
  SampleResult r{lb.value(), lb.mask, lb.vote, lb.objectness, lb.box};
  if (!std::isfinite(r.total)) return r;
  tape.backward(lb.total);
  const auto& ps = net.params();
  if (grads.size() != ps.size()) {
    grads.clear();
    for (const auto& p : ps) grads.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (tape.used(ps[i])) grads[i] += tape.grad(ps[i]);
  }
  return r;
}

class Adam {
 public:
  explicit Adam(const nn::ParameterSet& ps) {
    for (const auto& p : ps) {
      m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void step(nn::ParameterSet& ps, const std::vector<Matrix>& grads, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grads[i];
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grads[i].cwiseAbs2();
      const Matrix mh = m_[i] / c1;
      const Matrix vh = v_[i] / c2;
      ps[i].value.array() -= lr * mh.array() / (vh.array().sqrt() + kEps);
    }
    ps.round_to_float();
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  int t_ = 0;
};

double scheduled_rate(double base, int step, int total) {
  if (4 * step >= 3 * total) return base / 4;
  if (2 * step >= total) return base / 2;
  return base;
}

struct BatchResult {
  std::vector<Matrix> grads;
  SampleResult mean;
};

BatchResult batch_gradients(const TrackerNet& net, const std::vector<WindowInput>& batch, const TrainConfig& cfg,
                            const std::string& label) {
  const auto n = static_cast<std::int64_t>(batch.size());
  std::vector<std::vector<Matrix>> per(batch.size());
  std::vector<SampleResult> res(batch.size());
  parallel_for_dynamic(n, [&](std::int64_t i) { res[i] = sample_gradients(net, batch[i], cfg, per[i]); },
                       cfg.workers);
  BatchResult out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!std::isfinite(res[i].total)) {
      std::ostringstream msg;
      msg << "non-finite loss in " << label << ", sample " << i << " (frames";
      for (int f : batch[i].frame_ids) msg << ' ' << f;
      msg << "): mask=" << res[i].mask << " vote=" << res[i].vote << " objectness=" << res[i].objectness
          << " box=" << res[i].box;
      throw NumericError(msg.str());
    }
    if (out.grads.empty()) {
      out.grads = std::move(per[i]);
    } else {
      for (std::size_t p = 0; p < out.grads.size(); ++p) out.grads[p] += per[i][p];
    }
    out.mean.total += res[i].total;
    out.mean.mask += res[i].mask;
    out.mean.vote += res[i].vote;
    out.mean.objectness += res[i].objectness;
    out.mean.box += res[i].box;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (auto& g : out.grads) g *= inv;
  for (const auto& g : out.grads) {
    if (!g.allFinite()) throw NumericError("non-finite gradient in " + label);
  }
  out.mean.total *= inv;
  out.mean.mask *= inv;
  out.mean.vote *= inv;
  out.mean.objectness *= inv;
  out.mean.box *= inv;
  return out;
}

Summary evaluate(const TrackerNet& net, const std::vector<SequenceSample>& eval_set, int limit, int workers) {
  const std::size_t n = limit > 0 ? std::min<std::size_t>(eval_set.size(), static_cast<std::size_t>(limit))
                                  : eval_set.size();
  const StmdTracker tracker(net);
  const auto results = run_ope_batch(tracker, std::span<const SequenceSample>(eval_set.data(), n), workers);
  return summarize(results);
}

}  // namespace

double accumulate_gradients(const TrackerNet& net, const WindowInput& window, const TrainConfig& cfg,
                            std::vector<Matrix>& grads) {
  return sample_gradients(net, window, cfg, grads).total;
}

TrainOutcome train_loop(TrackerNet& net, const TrainConfig& cfg, const std::vector<SequenceSample>& train_set,
                        const std::vector<SequenceSample>& eval_set,
                        const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  if (train_set.empty()) throw ArgumentError("train_loop: empty training set");
  for (const auto& s : train_set) {
    if (!s.has_labels() || s.length() < 2) throw ArgumentError("train_loop: training sequences need labels and >= 2 frames");
  }
  const TrackerConfig& tcfg = net.config();
  const int per_epoch = static_cast<int>((train_set.size() + cfg.batch_size - 1) / cfg.batch_size);
  const int total_steps = per_epoch * cfg.epochs;

  TrainOutcome outcome;
  Adam adam(net.params());
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 rng(mix_seed(cfg.seed, 0xE0 + static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch + 1;
    for (int b = 0; b < per_epoch; ++b) {
      const std::size_t lo = static_cast<std::size_t>(b) * cfg.batch_size;
      const std::size_t hi = std::min(order.size(), lo + static_cast<std::size_t>(cfg.batch_size));
      std::vector<WindowInput> batch;
      for (std::size_t i = lo; i < hi; ++i) {
        const SequenceSample& seq = train_set[order[i]];
        const std::uint64_t s = mix_seed(cfg.seed, static_cast<std::uint64_t>(outcome.steps) * 4096 + (i - lo));
        const int t = 1 + static_cast<int>(s % (seq.length() - 1));
        batch.push_back(make_training_window(seq, t, tcfg, cfg, s));
      }
      const std::string label = "epoch " + std::to_string(epoch + 1) + " batch " + std::to_string(b);
      const BatchResult br = batch_gradients(net, batch, cfg, label);
      const double lr = scheduled_rate(cfg.learning_rate, outcome.steps, total_steps);
      adam.step(net.params(), br.grads, lr);
      ++outcome.steps;
      outcome.loss_curve.push_back(br.mean.total);
      rec.learning_rate = lr;
      rec.mean_loss += br.mean.total / per_epoch;
      rec.mask += br.mean.mask / per_epoch;
      rec.vote += br.mean.vote / per_epoch;
      rec.objectness += br.mean.objectness / per_epoch;
      rec.box += br.mean.box / per_epoch;
    }
    rec.step = outcome.steps;
    const bool last = epoch + 1 == cfg.epochs;
    const bool due = cfg.eval_every > 0 && (epoch + 1) % cfg.eval_every == 0;
    if (!eval_set.empty() && (last || due)) {
      rec.eval = evaluate(net, eval_set, cfg.eval_limit, cfg.workers);
      if (rec.eval->success > outcome.best_success) {
        outcome.best_success = rec.eval->success;
        outcome.best_params = net.params().flatten();
      }
    }
    outcome.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  if (outcome.best_params.empty()) {
    outcome.best_params = net.params().flatten();
  } else {
    net.params().assign(outcome.best_params);
  }
  return outcome;
}

std::vector<double> overfit_batch(TrackerNet& net, const TrainConfig& cfg, const std::vector<WindowInput>& batch,
                                  int steps) {
  if (batch.empty() || steps < 1) throw ArgumentError("overfit_batch: need a batch and steps >= 1");
  Adam adam(net.params());
  std::vector<double> curve;
  for (int s = 0; s < steps; ++s) {
    const BatchResult br = batch_gradients(net, batch, cfg, "overfit step " + std::to_string(s));
    curve.push_back(br.mean.total);
    adam.step(net.params(), br.grads, cfg.learning_rate);
  }
  return curve;
}

GradCheckReport grad_check(const std::function<ag::Var(ag::Tape&)>& fn, const std::vector<ag::Parameter*>& params,
                           double step, int max_entries, double atol) {
  std::vector<Matrix> analytic;
  {
    ag::Tape tape;
    const ag::Var out = fn(tape);
    tape.backward(out);
    for (const ag::Parameter* p : params) analytic.push_back(tape.grad(*p));
  }
  auto eval = [&]() {
    ag::Tape tape;
    return fn(tape).scalar();
  };
  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    ag::Parameter& p = *params[pi];
    if (!analytic[pi].allFinite()) throw NumericError("grad_check: non-finite gradient for " + p.name);
    const Eigen::Index total = p.value.size();
    const Eigen::Index probes = max_entries > 0 ? std::min<Eigen::Index>(total, max_entries) : total;
    for (Eigen::Index q = 0; q < probes; ++q) {
      const Eigen::Index e = probes == total ? q : q * total / probes;
      double& x = p.value.data()[e];
      const double orig = x;
      x = orig + step;
      const double up = eval();
      x = orig - step;
      const double down = eval();
      x = orig;
      const double numeric = (up - down) / (2.0 * step);
      if (!std::isfinite(numeric)) throw NumericError("grad_check: non-finite numeric gradient for " + p.name);
      const double a = analytic[pi].data()[e];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), atol});
      ++report.checked;
      if (rel > report.max_rel_error || report.worst_parameter.empty()) {
        if (rel >= report.max_rel_error) {
          report.max_rel_error = rel;
          report.worst_parameter = p.name;
        }
      }
    }
  }
  return report;
}

}  // namespace stmd
