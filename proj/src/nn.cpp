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

#include "stmd/nn.hpp"

#include "stmd/errors.hpp"

#include <cmath>

namespace stmd::nn {

Parameter& ParameterSet::add(std::string name, Matrix init) {
  if (find(name) != nullptr) throw ArgumentError("duplicate parameter name " + name);
  params_.push_back(std::make_unique<Parameter>(Parameter{std::move(name), std::move(init)}));
  return *params_.back();
}

std::size_t ParameterSet::count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

Parameter* ParameterSet::find(const std::string& name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

std::vector<double> ParameterSet::flatten() const {
  std::vector<double> out;
  out.reserve(count());
  for (const auto& p : params_) out.insert(out.end(), p->value.data(), p->value.data() + p->value.size());
  return out;
}

void ParameterSet::assign(const std::vector<double>& flat) {
  if (flat.size() != count()) throw ArgumentError("parameter count mismatch");
  std::size_t off = 0;
  for (auto& p : params_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(off), p->value.size(), p->value.data());
    off += static_cast<std::size_t>(p->value.size());
  }
}

void ParameterSet::round_to_float() {
  for (auto& p : params_) {
    p->value = p->value.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
  }
}

Matrix he_uniform(int in, int out, std::mt19937_64& rng) {
  const double lim = std::sqrt(6.0 / std::max(1, in));
  std::uniform_real_distribution<double> u(-lim, lim);
  Matrix m(in, out);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

Linear Linear::create(ParameterSet& ps, const std::string& name, int in, int out,
                      std::mt19937_64& rng) {
  Linear l;
  l.weight = &ps.add(name + ".weight", he_uniform(in, out, rng));
  l.bias = &ps.add(name + ".bias", Matrix::Zero(1, out));
  return l;
}

Var Linear::operator()(Tape& tape, const Var& x) const {
  return ag::add_row(ag::matmul(x, tape.param(*weight)), tape.param(*bias));
}

}  // namespace stmd::nn
