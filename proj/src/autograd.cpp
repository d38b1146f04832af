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

#include "stmd/autograd.hpp"

#include "stmd/errors.hpp"

#include <cmath>

namespace stmd::ag {

const Matrix& Var::value() const { return tape_->value(id_); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw ArgumentError("scalar() on a non-1x1 variable");
  return v(0, 0);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), nullptr, false});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::param(const Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  nodes_.push_back(Node{p.value, Matrix(), nullptr, true});
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_.emplace(&p, id);
  return Var(this, id);
}

Var Tape::record(Matrix value, std::span<const Var> parents, BackwardFn fn) {
  bool needs = false;
  for (const Var& p : parents) {
    if (p.tape_ != this) throw ArgumentError("variables from different tapes");
    needs = needs || nodes_[p.id_].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Matrix(), needs ? std::move(fn) : nullptr, needs});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(const Var& v, const Matrix& g) {
  Node& n = nodes_[v.id_];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(const Var& output) {
  if (output.rows() != 1 || output.cols() != 1) throw ArgumentError("backward needs a 1x1 output");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  nodes_[output.id_].grad = Matrix::Ones(1, 1);
  for (int id = output.id_; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.backward && n.grad.size() > 0) n.backward(*this, n.grad);
  }
}

Matrix Tape::grad(const Parameter& p) const {
  auto it = param_nodes_.find(&p);
  if (it == param_nodes_.end() || nodes_[it->second].grad.size() == 0) {
    return Matrix::Zero(p.value.rows(), p.value.cols());
  }
  return nodes_[it->second].grad;
}

Matrix Tape::grad(const Var& v) const {
  const Node& n = nodes_[v.id_];
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ArgumentError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
  }
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw ArgumentError("matmul: inner dimensions " + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()));
  }
  Matrix out = a.value() * b.value();
  const Var parents[] = {a, b};
  return a.tape().record(std::move(out), parents, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a.id())) t.accumulate(a, g * b.value().transpose());
    if (t.requires_grad(b.id())) t.accumulate(b, a.value().transpose() * g);
  });
}

Var transpose(const Var& a) {
  Matrix out = a.value().transpose();
  const Var parents[] = {a};
  return a.tape().record(std::move(out), parents,
                         [a](Tape& t, const Matrix& g) { t.accumulate(a, g.transpose()); });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Matrix out = a.value() + b.value();
  const Var parents[] = {a, b};
  return a.tape().record(std::move(out), parents, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Matrix out = a.value() - b.value();
  const Var parents[] = {a, b};
  return a.tape().record(std::move(out), parents, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, -g);
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  Matrix out = a.value().cwiseProduct(b.value());
  const Var parents[] = {a, b};
  return a.tape().record(std::move(out), parents, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a.id())) t.accumulate(a, g.cwiseProduct(b.value()));
    if (t.requires_grad(b.id())) t.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var scale(const Var& a, double s) {
  Matrix out = a.value() * s;
  const Var parents[] = {a};
  return a.tape().record(std::move(out), parents,
                         [a, s](Tape& t, const Matrix& g) { t.accumulate(a, g * s); });
}

Var add_row(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw ArgumentError("add_row: shape mismatch");
  Matrix out = a.value().rowwise() + row.value().row(0);
  const Var parents[] = {a, row};
  return a.tape().record(std::move(out), parents, [a, row](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (t.requires_grad(row.id())) t.accumulate(row, g.colwise().sum());
  });
}

Var outer_add(const Var& col, const Var& row) {
  if (col.cols() != 1 || row.rows() != 1) throw ArgumentError("outer_add: need n x 1 and 1 x m");
  Matrix out = col.value().replicate(1, row.cols()).rowwise() + row.value().row(0);
  const Var parents[] = {col, row};
  return col.tape().record(std::move(out), parents, [col, row](Tape& t, const Matrix& g) {
    if (t.requires_grad(col.id())) t.accumulate(col, g.rowwise().sum());
    if (t.requires_grad(row.id())) t.accumulate(row, g.colwise().sum());
  });
}

Var scale_rows(const Var& a, const Var& w) {
  if (w.cols() != 1 || w.rows() != a.rows()) throw ArgumentError("scale_rows: shape mismatch");
  Matrix out = w.value().col(0).asDiagonal() * a.value();
  const Var parents[] = {a, w};
  return a.tape().record(std::move(out), parents, [a, w](Tape& t, const Matrix& g) {
    if (t.requires_grad(a.id())) t.accumulate(a, w.value().col(0).asDiagonal() * g);
    if (t.requires_grad(w.id())) {
      t.accumulate(w, g.cwiseProduct(a.value()).rowwise().sum());
    }
  });
}

Var scale_by(const Var& a, const Var& s) {
  const double k = s.scalar();
  Matrix out = a.value() * k;
  const Var parents[] = {a, s};
  return a.tape().record(std::move(out), parents, [a, s, k](Tape& t, const Matrix& g) {
    if (t.requires_grad(a.id())) t.accumulate(a, g * k);
    if (t.requires_grad(s.id())) {
      t.accumulate(s, Matrix::Constant(1, 1, g.cwiseProduct(a.value()).sum()));
    }
  });
}

Var relu(const Var& a) {
  Matrix out = a.value().cwiseMax(0.0);
  const Var parents[] = {a};
  const int self = a.tape().size();
  return a.tape().record(std::move(out), parents, [a, self](Tape& t, const Matrix& g) {
    const Matrix& y = t.value(self);
    t.accumulate(a, g.cwiseProduct((y.array() > 0.0).cast<double>().matrix()));
  });
}

Var sigmoid(const Var& a) {
  Matrix out = a.value().unaryExpr([](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  const Var parents[] = {a};
  const int self = a.tape().size();
  return a.tape().record(std::move(out), parents, [a, self](Tape& t, const Matrix& g) {
    const Matrix& y = t.value(self);
    t.accumulate(a, g.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Var tanh(const Var& a) {
  Matrix out = a.value().array().tanh().matrix();
  const Var parents[] = {a};
  const int self = a.tape().size();
  return a.tape().record(std::move(out), parents, [a, self](Tape& t, const Matrix& g) {
    const Matrix& y = t.value(self);
    t.accumulate(a, g.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var activate(const Var& a, Activation act) {
  return act == Activation::kRelu ? relu(a) : a;
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ArgumentError("concat_cols: no inputs");
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw ArgumentError("concat_cols: row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (const Var& p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  std::vector<Var> keep(parts.begin(), parts.end());
  return parts[0].tape().record(std::move(out), parts, [keep](Tape& t, const Matrix& g) {
    Eigen::Index c0 = 0;
    for (const Var& p : keep) {
      if (t.requires_grad(p.id())) t.accumulate(p, g.middleCols(c0, p.cols()));
      c0 += p.cols();
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ArgumentError("concat_rows: no inputs");
  const Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) throw ArgumentError("concat_rows: column mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  std::vector<Var> keep(parts.begin(), parts.end());
  return parts[0].tape().record(std::move(out), parts, [keep](Tape& t, const Matrix& g) {
    Eigen::Index r0 = 0;
    for (const Var& p : keep) {
      if (t.requires_grad(p.id())) t.accumulate(p, g.middleRows(r0, p.rows()));
      r0 += p.rows();
    }
  });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) throw ArgumentError("slice_cols: range");
  Matrix out = a.value().middleCols(start, count);
  const Var parents[] = {a};
  return a.tape().record(std::move(out), parents, [a, start, count](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    full.middleCols(start, count) = g;
    t.accumulate(a, full);
  });
}

Var gather_rows(const Var& a, std::span<const int> index) {
  Matrix out(static_cast<Eigen::Index>(index.size()), a.cols());
  const Matrix& av = a.value();
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || index[i] >= av.rows()) throw ArgumentError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = av.row(index[i]);
  }
  std::vector<int> idx(index.begin(), index.end());
  const Var parents[] = {a};
  return a.tape().record(std::move(out), parents, [a, idx](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) full.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
    t.accumulate(a, full);
  });
}

Var segment_reduce(const Var& a, int group, Aggregator agg) {
  if (group < 1 || a.rows() % group != 0) throw ArgumentError("segment_reduce: bad group size");
  const Eigen::Index n = a.rows() / group;
  const Eigen::Index c = a.cols();
  const Matrix& av = a.value();
  Matrix out(n, c);
  if (agg == Aggregator::kSum) {
    for (Eigen::Index i = 0; i < n; ++i) out.row(i) = av.middleRows(i * group, group).colwise().sum();
    const Var parents[] = {a};
    return a.tape().record(std::move(out), parents, [a, group, n](Tape& t, const Matrix& g) {
      Matrix full(a.rows(), a.cols());
      for (Eigen::Index i = 0; i < n; ++i) {
        full.middleRows(i * group, group) = g.row(i).replicate(group, 1);
      }
      t.accumulate(a, full);
    });
  }
  std::vector<int> arg(static_cast<std::size_t>(n * c));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      Eigen::Index best = i * group;
      for (Eigen::Index r = i * group + 1; r < (i + 1) * group; ++r) {
        if (av(r, j) > av(best, j)) best = r;
      }
      out(i, j) = av(best, j);
      arg[static_cast<std::size_t>(i * c + j)] = static_cast<int>(best);
    }
  }
  const Var parents[] = {a};
  return a.tape().record(std::move(out), parents, [a, arg, n, c](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) full(arg[static_cast<std::size_t>(i * c + j)], j) += g(i, j);
    }
    t.accumulate(a, full);
  });
}

Var softmax_rows(const Var& a) {
  Matrix out = a.value();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double m = out.row(i).maxCoeff();
    out.row(i) = (out.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  const Var parents[] = {a};
  const int self = a.tape().size();
  return a.tape().record(std::move(out), parents, [a, self](Tape& t, const Matrix& g) {
    const Matrix& y = t.value(self);
    const Eigen::VectorXd dot = g.cwiseProduct(y).rowwise().sum();
    Matrix d = g;
    d.colwise() -= dot;
    t.accumulate(a, d.cwiseProduct(y));
  });
}

Var sum(const Var& a) {
  Matrix out = Matrix::Constant(1, 1, a.value().sum());
  const Var parents[] = {a};
  return a.tape().record(std::move(out), parents, [a](Tape& t, const Matrix& g) {
    t.accumulate(a, Matrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var add_scalars(std::span<const Var> terms) {
  if (terms.empty()) throw ArgumentError("add_scalars: no terms");
  double total = 0.0;
  for (const Var& v : terms) total += v.scalar();
  std::vector<Var> keep(terms.begin(), terms.end());
  return terms[0].tape().record(Matrix::Constant(1, 1, total), terms,
                                [keep](Tape& t, const Matrix& g) {
                                  for (const Var& v : keep) t.accumulate(v, g);
                                });
}

Var bce_with_logits(const Var& logits, const Matrix& targets, const Matrix& row_weights) {
  const Matrix& z = logits.value();
  if (targets.rows() != z.rows() || targets.cols() != z.cols() || row_weights.rows() != z.rows()) {
    throw ArgumentError("bce_with_logits: shape mismatch");
  }
  const double count = static_cast<double>(z.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const double x = z(i, j);
      // log(1 + exp(-|x|)) + max(x, 0) - x*y
      const double loss = std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0) - x * targets(i, j);
      total += row_weights(i, 0) * loss;
    }
  }
  const Var parents[] = {logits};
  return logits.tape().record(
      Matrix::Constant(1, 1, count > 0 ? total / count : 0.0), parents,
      [logits, targets, row_weights, count](Tape& t, const Matrix& g) {
        const Matrix& zv = logits.value();
        Matrix d(zv.rows(), zv.cols());
        for (Eigen::Index i = 0; i < zv.rows(); ++i) {
          for (Eigen::Index j = 0; j < zv.cols(); ++j) {
            const double x = zv(i, j);
            const double s = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
            d(i, j) = g(0, 0) * row_weights(i, 0) * (s - targets(i, j)) / count;
          }
        }
        t.accumulate(logits, d);
      });
}

Var smooth_l1(const Var& pred, const Matrix& target, const Matrix& row_weights, double beta) {
  const Matrix& p = pred.value();
  if (target.rows() != p.rows() || target.cols() != p.cols() || row_weights.rows() != p.rows()) {
    throw ArgumentError("smooth_l1: shape mismatch");
  }
  const double wsum = row_weights.sum();
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    if (row_weights(i, 0) == 0.0) continue;
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      const double d = std::abs(p(i, j) - target(i, j));
      total += row_weights(i, 0) * (d < beta ? 0.5 * d * d / beta : d - 0.5 * beta);
    }
  }
  const Var parents[] = {pred};
  return pred.tape().record(
      Matrix::Constant(1, 1, wsum > 0 ? total / wsum : 0.0), parents,
      [pred, target, row_weights, wsum, beta](Tape& t, const Matrix& g) {
        if (wsum <= 0) return;
        const Matrix& pv = pred.value();
        Matrix d = Matrix::Zero(pv.rows(), pv.cols());
        for (Eigen::Index i = 0; i < pv.rows(); ++i) {
          if (row_weights(i, 0) == 0.0) continue;
          for (Eigen::Index j = 0; j < pv.cols(); ++j) {
            const double diff = pv(i, j) - target(i, j);
            const double slope = std::abs(diff) < beta ? diff / beta : (diff > 0 ? 1.0 : -1.0);
            d(i, j) = g(0, 0) * row_weights(i, 0) * slope / wsum;
          }
        }
        t.accumulate(pred, d);
      });
}

}  // namespace stmd::ag
