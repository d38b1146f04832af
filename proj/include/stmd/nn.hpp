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

#include "stmd/autograd.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace stmd::nn {

using ag::Parameter;
using ag::Tape;
using ag::Var;

/// Owns parameters at stable addresses, in creation order.
class ParameterSet {
 public:
  Parameter& add(std::string name, Matrix init);
  std::size_t size() const { return params_.size(); }
  /// Total scalar count.
  std::size_t count() const;

  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }
  Parameter* find(const std::string& name);

  std::vector<double> flatten() const;
  void assign(const std::vector<double>& flat);
  /// Rounds every value to the nearest float32.
  void round_to_float();

  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

/// y = x W + b
struct Linear {
  Parameter* weight = nullptr;  // in x out
  Parameter* bias = nullptr;    // 1 x out

  static Linear create(ParameterSet& ps, const std::string& name, int in, int out, std::mt19937_64& rng);
  Var operator()(Tape& tape, const Var& x) const;
  int in() const { return static_cast<int>(weight->value.rows()); }
  int out() const { return static_cast<int>(weight->value.cols()); }
};

/// Uniform(-sqrt(6/fan_in), sqrt(6/fan_in)) for ReLU stacks.
Matrix he_uniform(int in, int out, std::mt19937_64& rng);

}  // namespace stmd::nn
