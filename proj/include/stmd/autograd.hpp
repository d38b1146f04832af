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

// Reverse-mode automatic differentiation over dense row-major matrices.
//
// A Tape records every operation of one forward pass. Values are computed
// eagerly; `Tape::backward` walks the records in reverse. Parameters live
// outside the tape and are referenced by address, so the same Parameter used
// twice in a pass accumulates into one gradient.

#include "stmd/types.hpp"

#include <functional>
#include <span>
#include <string>
#include <deque>
#include <unordered_map>
#include <vector>

namespace stmd::ag {

struct Parameter {
  std::string name;
  Matrix value;
};

class Tape;

class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Value of a 1x1 variable.
  double scalar() const;
  Tape& tape() const { return *tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  /// Receives the node's output gradient; adds into parent gradients via `accumulate`.
  using BackwardFn = std::function<void(Tape&, const Matrix& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var param(const Parameter& p);

  /// Records a node. `parents` are the ids the closure may accumulate into.
  Var record(Matrix value, std::span<const Var> parents, BackwardFn fn);

  /// Seeds d(output)/d(output) = 1; `output` must be 1x1.
  void backward(const Var& output);

  const Matrix& value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  void accumulate(const Var& v, const Matrix& g);

  /// Gradient with respect to `p` after backward; zeros when `p` was unused.
  Matrix grad(const Parameter& p) const;
  Matrix grad(const Var& v) const;
  bool used(const Parameter& p) const { return param_nodes_.contains(&p); }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;  // empty until something flows in
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::deque<Node> nodes_;  // deque: references to values stay valid while recording
  std::unordered_map<const Parameter*, int> param_nodes_;
};

// Linear algebra
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise
Var scale(const Var& a, double s);
/// a (n x c) + row (1 x c) broadcast over rows.
Var add_row(const Var& a, const Var& row);
/// col (n x 1) + row (1 x m) -> n x m.
Var outer_add(const Var& col, const Var& row);
/// Row i of a scaled by w(i); w is n x 1.
Var scale_rows(const Var& a, const Var& w);
/// a scaled by the 1x1 variable s.
Var scale_by(const Var& a, const Var& s);

// Pointwise
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var activate(const Var& a, Activation act);

// Shape
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
Var gather_rows(const Var& a, std::span<const int> index);
/// Rows are consecutive groups of `group` rows; returns per-group column max or sum.
Var segment_reduce(const Var& a, int group, Aggregator agg);
Var softmax_rows(const Var& a);

// Reductions and losses (all return 1x1)
Var sum(const Var& a);
Var add_scalars(std::span<const Var> terms);
/// Mean over rows of weighted binary cross-entropy, computed from logits.
Var bce_with_logits(const Var& logits, const Matrix& targets, const Matrix& row_weights);
/// Sum over rows of w_i * sum_c smoothl1(pred - target), divided by sum(w) (0 if no weight).
Var smooth_l1(const Var& pred, const Matrix& target, const Matrix& row_weights, double beta = 1.0);

}  // namespace stmd::ag
