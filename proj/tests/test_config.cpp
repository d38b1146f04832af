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

#include "stmd/config.hpp"
#include "stmd/errors.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace stmd;
namespace fs = std::filesystem;

namespace {

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(RunConfig, DefaultsRoundTrip) {
  const RunConfig d;
  const auto j = to_json(d);
  EXPECT_EQ(to_json(run_config_from_json(nlohmann::json::parse(j.dump()))).dump(), j.dump());
  EXPECT_EQ(d.data.train_sequences, 300);
  EXPECT_EQ(d.data.eval_sequences, 50);
  EXPECT_EQ(d.tracker.window, 8);
  EXPECT_EQ(d.tracker.points, 128);
}

TEST(RunConfig, RejectsUnknownKeysAndBadTypes) {
  EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"trakcer":{}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"tracker":{"windw":3}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"tracker":{"window":"8"}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"tracker":{"window":2.5}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"tracker":{"padding":"mirror"}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"tracker":{"sigma":-1}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"data":{"occlusion_min":0.9,"occlusion_max":0.2}})")),
               ConfigError);
  // integers are valid numbers
  EXPECT_EQ(run_config_from_json(nlohmann::json::parse(R"({"tracker":{"sigma":1}})")).tracker.sigma, 1.0);
}

TEST(RunConfig, FreeFormOcclusionSchedule) {
  const auto c = run_config_from_json(nlohmann::json::parse(R"({"scenario":{"occlusion_schedule":{"3":1.0}}})"));
  ASSERT_EQ(c.scenario.occlusion_schedule.size(), 1u);
  EXPECT_EQ(c.scenario.occlusion_schedule.at(3), 1.0);
  EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"scenario":{"occlusion_schedule":{"x":1.0}}})")),
               ConfigError);
}

TEST(Overrides, DottedKeys) {
  auto doc = to_json(RunConfig{});
  apply_override(doc, "tracker.sigma=1.5");
  apply_override(doc, "tracker.padding=zero");
  apply_override(doc, "tracker.temporal_enabled=false");
  apply_override(doc, "train.epochs=3");
  const auto c = run_config_from_json(nlohmann::json::parse(doc.dump()));
  EXPECT_EQ(c.tracker.sigma, 1.5);
  EXPECT_EQ(c.tracker.padding, PaddingMode::kZero);
  EXPECT_FALSE(c.tracker.temporal_enabled);
  EXPECT_EQ(c.train.epochs, 3);
  EXPECT_THROW(apply_override(doc, "tracker.sigmaa=1"), ConfigError);
  EXPECT_THROW(apply_override(doc, "tracker.sigma=abc"), ConfigError);
  EXPECT_THROW(apply_override(doc, "train.epochs=1.5"), ConfigError);
  EXPECT_THROW(apply_override(doc, "tracker.temporal_enabled=1"), ConfigError);
  EXPECT_THROW(apply_override(doc, "tracker=3"), ConfigError);
  EXPECT_THROW(apply_override(doc, "noequals"), ConfigError);
}

TEST(LoadRunConfig, LayersFileOverridesAndSeed) {
  const auto p = write_file("stmd_cfg_layers.json", R"({"seed":3,"tracker":{"sigma":0.5},"train":{"epochs":2}})");
  const auto c = load_run_config(p, {"train.epochs=5"}, 7);
  EXPECT_EQ(c.tracker.sigma, 0.5);
  EXPECT_EQ(c.train.epochs, 5);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.scenario.seed, 7u);
  EXPECT_EQ(c.tracker.seed, 7u);
  EXPECT_EQ(c.train.seed, 7u);
  const auto bad = write_file("stmd_cfg_bad.json", "{ not json");
  EXPECT_THROW(load_run_config(bad, {}, std::nullopt), ParseError);
  EXPECT_THROW(load_run_config(fs::path("/nonexistent/cfg.json"), {}, std::nullopt), ConfigError);
}

TEST(Schema, CoversEveryKey) {
  const auto schema = config_schema();
  EXPECT_EQ(schema["$schema"], "https://json-schema.org/draft/2020-12/schema");
  const auto doc = to_json(RunConfig{});
  for (const auto& [section, body] : doc.items()) {
    ASSERT_TRUE(schema["properties"].contains(section)) << section;
    if (!body.is_object()) continue;
    for (const auto& [key, value] : body.items()) {
      EXPECT_TRUE(schema["properties"][section]["properties"].contains(key)) << section << "." << key;
    }
  }
  EXPECT_EQ(schema["additionalProperties"], false);
}

TEST(SequenceScenario, DeterministicPerSplitAndIndex) {
  RunConfig c;
  c.seed = 4;
  EXPECT_EQ(sequence_scenario(c, false, 3).seed, sequence_scenario(c, false, 3).seed);
  EXPECT_NE(sequence_scenario(c, false, 3).seed, sequence_scenario(c, true, 3).seed);
  EXPECT_NE(sequence_scenario(c, false, 3).seed, sequence_scenario(c, false, 4).seed);
  int occluded = 0;
  for (int i = 0; i < 200; ++i) {
    const auto s = sequence_scenario(c, false, i);
    occluded += !s.occlusion_schedule.empty();
    for (const auto& [f, frac] : s.occlusion_schedule) {
      EXPECT_GE(f, 2);
      EXPECT_LT(f, s.num_frames);
      EXPECT_GE(frac, c.data.occlusion_min);
      EXPECT_LE(frac, c.data.occlusion_max);
    }
  }
  EXPECT_GT(occluded, 30);
  EXPECT_LT(occluded, 90);
  c.data.occlusion_prob = 0.0;
  EXPECT_TRUE(sequence_scenario(c, false, 0).occlusion_schedule.empty());
}
