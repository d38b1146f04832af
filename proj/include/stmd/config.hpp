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

// Run configuration: one JSON document with scenario, tracker, train and data
// sections plus a top-level seed. Files and --set overrides are merged onto
// the defaults; unknown keys and ill-typed values are rejected.

#include "stmd/train.hpp"
#include "stmd/types.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace stmd {

/// Benchmark composition. A sequence gets one occlusion event with
/// probability `occlusion_prob`: 1-2 consecutive frames losing a uniform
/// fraction in [occlusion_min, occlusion_max] of the target's points.
struct DataConfig {
  int train_sequences = 300;
  int eval_sequences = 50;
  double occlusion_prob = 0.3;
  double occlusion_min = 0.3;
  double occlusion_max = 1.0;

  void validate() const;
};

struct RunConfig {
  ScenarioConfig scenario;
  TrackerConfig tracker;
  TrainConfig train;
  DataConfig data;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::ordered_json tracker_config_to_json(const TrackerConfig& cfg);
TrackerConfig tracker_config_from_json(const nlohmann::json& j);

nlohmann::ordered_json to_json(const RunConfig& cfg);
/// Strict: every key must be known; missing keys keep their defaults.
RunConfig run_config_from_json(const nlohmann::json& j);

/// JSON Schema (draft 2020-12) describing the accepted document.
nlohmann::ordered_json config_schema();

/// Applies one "dotted.key=value" override to a config document. The value
/// is parsed as the type of the existing entry. Throws ConfigError.
void apply_override(nlohmann::ordered_json& doc, const std::string& assignment);

/// Defaults, then the file (if any), then the overrides in order, then the
/// seed (if any). Throws ConfigError or ParseError.
RunConfig load_run_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides,
                          std::optional<std::uint64_t> seed);

/// Per-sequence scenario for split "train" or "eval" at position i.
ScenarioConfig sequence_scenario(const RunConfig& cfg, bool eval_split, int index);

}  // namespace stmd
