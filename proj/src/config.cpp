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

#include "stmd/core_data.hpp"
#include "stmd/errors.hpp"

#include <fstream>
#include <random>
#include <sstream>

namespace stmd {

using nlohmann::json;
using nlohmann::ordered_json;

void DataConfig::validate() const {
  if (train_sequences < 0 || eval_sequences < 0) throw ConfigError("data sequence counts must be >= 0");
  if (!(occlusion_prob >= 0.0 && occlusion_prob <= 1.0)) throw ConfigError("data.occlusion_prob must be in [0, 1]");
  if (!(occlusion_min >= 0.0 && occlusion_min <= occlusion_max && occlusion_max <= 1.0)) {
    throw ConfigError("data occlusion range must satisfy 0 <= min <= max <= 1");
  }
}

void RunConfig::validate() const {
  scenario.validate();
  tracker.validate();
  train.validate();
  data.validate();
}

namespace {

std::string to_string(Activation a) { return a == Activation::kRelu ? "relu" : "linear"; }
std::string to_string(Aggregator a) { return a == Aggregator::kMax ? "max" : "sum"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "linear") return Activation::kLinear;
  throw ConfigError("unknown activation '" + s + "'");
}

Aggregator aggregator_from_string(const std::string& s) {
  if (s == "max") return Aggregator::kMax;
  if (s == "sum") return Aggregator::kSum;
  throw ConfigError("unknown aggregator '" + s + "'");
}

ordered_json scenario_to_json(const ScenarioConfig& s) {
  ordered_json occ = ordered_json::object();
  for (const auto& [frame, fraction] : s.occlusion_schedule) occ[std::to_string(frame)] = fraction;
  return {{"num_frames", s.num_frames},
          {"points_per_frame", s.points_per_frame},
          {"num_distractors", s.num_distractors},
          {"min_speed", s.min_speed},
          {"max_speed", s.max_speed},
          {"distractor_min_gap", s.distractor_min_gap},
          {"noise_sigma", s.noise_sigma},
          {"occlusion_schedule", occ}};
}

ordered_json train_to_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"positive_radius", t.positive_radius},
          {"weights",
           {{"mask", t.weights.mask}, {"vote", t.weights.vote}, {"objectness", t.weights.objectness},
            {"box", t.weights.box}}},
          {"jitter_center", t.jitter_center},
          {"jitter_theta", t.jitter_theta},
          {"eval_every", t.eval_every},
          {"eval_limit", t.eval_limit},
          {"workers", t.workers}};
}

ordered_json data_to_json(const DataConfig& d) {
  return {{"train_sequences", d.train_sequences},
          {"eval_sequences", d.eval_sequences},
          {"occlusion_prob", d.occlusion_prob},
          {"occlusion_min", d.occlusion_min},
          {"occlusion_max", d.occlusion_max}};
}

ordered_json tracker_body(const TrackerConfig& c) {
  return {{"window", c.window},
          {"points", c.points},
          {"centers", c.centers},
          {"sa_neighbors", c.sa_neighbors},
          {"knn_k", c.knn_k},
          {"temporal_kernel", c.temporal_kernel},
          {"temporal_stride", c.temporal_stride},
          {"padding", to_string(c.padding)},
          {"temporal_enabled", c.temporal_enabled},
          {"memory", to_string(c.memory)},
          {"sigma", c.sigma},
          {"top_k", c.top_k},
          {"width_spatial", c.width_spatial},
          {"width_mid", c.width_mid},
          {"width_out", c.width_out},
          {"heads", c.heads},
          {"crop_margin", c.crop_margin},
          {"activation", to_string(c.activation)},
          {"aggregator", to_string(c.aggregator)}};
}

bool is_free_form(const std::string& path) { return path == "scenario.occlusion_schedule"; }

template <class J>
const char* type_name(const J& v) {
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  if (v.is_string()) return "string";
  if (v.is_object()) return "object";
  return v.type_name();
}

template <class J>
bool compatible(const ordered_json& want, const J& got) {
  if (want.is_boolean()) return got.is_boolean();
  if (want.is_number_integer()) return got.is_number_integer();
  if (want.is_number()) return got.is_number();
  if (want.is_string()) return got.is_string();
  if (want.is_object()) return got.is_object();
  return false;
}

template <class J>
void merge_into(ordered_json& base, const J& overlay, const std::string& prefix) {
  if (!overlay.is_object()) throw ConfigError((prefix.empty() ? "config" : prefix) + " must be an object");
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + path + "'");
    ordered_json& slot = base[it.key()];
    if (!compatible(slot, it.value())) {
      throw ConfigError("config key '" + path + "' expects " + type_name(slot) + ", got " +
                        type_name(it.value()));
    }
    if (slot.is_object() && !is_free_form(path)) {
      merge_into(slot, it.value(), path);
    } else {
      slot = ordered_json::parse(it.value().dump());
    }
  }
}

template <class T, class J>
T get(const J& j, const char* key) {
  return j.at(key).template get<T>();
}

ordered_json schema_for(const ordered_json& v, const std::string& path) {
  if (is_free_form(path)) {
    return {{"type", "object"},
            {"description", "frame index -> fraction of target points removed"},
            {"additionalProperties", {{"type", "number"}, {"minimum", 0}, {"maximum", 1}}}};
  }
  if (v.is_object()) {
    ordered_json props = ordered_json::object();
    for (auto it = v.begin(); it != v.end(); ++it) {
      props[it.key()] = schema_for(it.value(), path.empty() ? it.key() : path + "." + it.key());
    }
    return {{"type", "object"}, {"properties", props}, {"additionalProperties", false}};
  }
  ordered_json s = {{"type", type_name(v)}, {"default", v}};
  if (path == "tracker.padding") s["enum"] = {"none", "zero", "replicate"};
  if (path == "tracker.memory") s["enum"] = {"bidirectional", "last_frame"};
  if (path == "tracker.activation") s["enum"] = {"relu", "linear"};
  if (path == "tracker.aggregator") s["enum"] = {"max", "sum"};
  return s;
}

template <class J>
TrackerConfig tracker_from(const J& j) {
  try {
    TrackerConfig c;
    c.window = get<int>(j, "window");
    c.points = get<int>(j, "points");
    c.centers = get<int>(j, "centers");
    c.sa_neighbors = get<int>(j, "sa_neighbors");
    c.knn_k = get<int>(j, "knn_k");
    c.temporal_kernel = get<int>(j, "temporal_kernel");
    c.temporal_stride = get<int>(j, "temporal_stride");
    c.padding = padding_from_string(get<std::string>(j, "padding"));
    c.temporal_enabled = get<bool>(j, "temporal_enabled");
    c.memory = memory_from_string(get<std::string>(j, "memory"));
    c.sigma = get<double>(j, "sigma");
    c.top_k = get<int>(j, "top_k");
    c.width_spatial = get<int>(j, "width_spatial");
    c.width_mid = get<int>(j, "width_mid");
    c.width_out = get<int>(j, "width_out");
    c.heads = get<int>(j, "heads");
    c.crop_margin = get<double>(j, "crop_margin");
    c.activation = activation_from_string(get<std::string>(j, "activation"));
    c.aggregator = aggregator_from_string(get<std::string>(j, "aggregator"));
    if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed");
    return c;
  } catch (const nlohmann::detail::exception& e) {
    throw ConfigError(std::string("tracker config: ") + e.what());
  }
}

RunConfig from_document(const ordered_json& doc) {
  try {
    RunConfig c;
    c.seed = doc.at("seed").get<std::uint64_t>();
    const auto& s = doc.at("scenario");
    c.scenario.num_frames = get<int>(s, "num_frames");
    c.scenario.points_per_frame = get<int>(s, "points_per_frame");
    c.scenario.num_distractors = get<int>(s, "num_distractors");
    c.scenario.min_speed = get<double>(s, "min_speed");
    c.scenario.max_speed = get<double>(s, "max_speed");
    c.scenario.distractor_min_gap = get<double>(s, "distractor_min_gap");
    c.scenario.noise_sigma = get<double>(s, "noise_sigma");
    const auto& occ = s.at("occlusion_schedule");
    for (auto it = occ.begin(); it != occ.end(); ++it) {
      std::size_t used = 0;
      int frame = 0;
      try {
        frame = std::stoi(it.key(), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != it.key().size()) throw ConfigError("occlusion_schedule key '" + it.key() + "' is not a frame index");
      if (!it.value().is_number()) throw ConfigError("occlusion_schedule values must be numbers");
      c.scenario.occlusion_schedule[frame] = it.value().template get<double>();
    }
    c.scenario.seed = c.seed;
    c.tracker = tracker_from(doc.at("tracker"));
    c.tracker.seed = c.seed;
    const auto& t = doc.at("train");
    c.train.epochs = get<int>(t, "epochs");
    c.train.batch_size = get<int>(t, "batch_size");
    c.train.learning_rate = get<double>(t, "learning_rate");
    c.train.positive_radius = get<double>(t, "positive_radius");
    const auto& w = t.at("weights");
    c.train.weights = {get<double>(w, "mask"), get<double>(w, "vote"), get<double>(w, "objectness"),
                       get<double>(w, "box")};
    c.train.jitter_center = get<double>(t, "jitter_center");
    c.train.jitter_theta = get<double>(t, "jitter_theta");
    c.train.eval_every = get<int>(t, "eval_every");
    c.train.eval_limit = get<int>(t, "eval_limit");
    c.train.workers = get<int>(t, "workers");
    c.train.seed = c.seed;
    const auto& d = doc.at("data");
    c.data.train_sequences = get<int>(d, "train_sequences");
    c.data.eval_sequences = get<int>(d, "eval_sequences");
    c.data.occlusion_prob = get<double>(d, "occlusion_prob");
    c.data.occlusion_min = get<double>(d, "occlusion_min");
    c.data.occlusion_max = get<double>(d, "occlusion_max");
    c.validate();
    return c;
  } catch (const nlohmann::detail::exception& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

ordered_json tracker_config_to_json(const TrackerConfig& cfg) {
  ordered_json j = tracker_body(cfg);
  j["seed"] = cfg.seed;
  return j;
}

TrackerConfig tracker_config_from_json(const json& j) { return tracker_from(j); }

ordered_json to_json(const RunConfig& cfg) {
  return {{"scenario", scenario_to_json(cfg.scenario)},
          {"tracker", tracker_body(cfg.tracker)},
          {"train", train_to_json(cfg.train)},
          {"data", data_to_json(cfg.data)},
          {"seed", cfg.seed}};
}

RunConfig run_config_from_json(const json& j) {
  ordered_json doc = to_json(RunConfig{});
  merge_into(doc, j, "");
  return from_document(doc);
}

ordered_json config_schema() {
  ordered_json s = schema_for(to_json(RunConfig{}), "");
  s["$schema"] = "https://json-schema.org/draft/2020-12/schema";
  s["title"] = "stmd run configuration";
  return s;
}

void apply_override(ordered_json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);

  ordered_json* slot = &doc;
  std::stringstream parts(key);
  std::string part;
  while (std::getline(parts, part, '.')) {
    if (!slot->is_object() || !slot->contains(part)) throw ConfigError("unknown config key '" + key + "'");
    slot = &(*slot)[part];
  }
  if (slot->is_object() && !is_free_form(key)) throw ConfigError("config key '" + key + "' is a section");

  ordered_json value;
  if (slot->is_string()) {
    value = text;
  } else {
    try {
      value = ordered_json::parse(text);
    } catch (const nlohmann::detail::exception&) {
      throw ConfigError("override '" + key + "': cannot parse '" + text + "' as " + type_name(*slot));
    }
  }
  if (!compatible(*slot, value)) {
    throw ConfigError("override '" + key + "' expects " + type_name(*slot) + ", got " + type_name(value));
  }
  *slot = value;
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides,
                          std::optional<std::uint64_t> seed) {
  ordered_json doc = to_json(RunConfig{});
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot read config file " + file->string());
    ordered_json parsed;
    try {
      parsed = ordered_json::parse(in);
    } catch (const nlohmann::detail::parse_error& e) {
      throw ParseError(file->string(), 0, e.what());
    }
    merge_into(doc, parsed, "");
  }
  for (const auto& o : overrides) apply_override(doc, o);
  if (seed) doc["seed"] = *seed;
  return from_document(doc);
}

ScenarioConfig sequence_scenario(const RunConfig& cfg, bool eval_split, int index) {
  ScenarioConfig s = cfg.scenario;
  s.seed = mix_seed(cfg.seed, (eval_split ? 0xE0000000ULL : 0x70000000ULL) + static_cast<std::uint64_t>(index));
  if (!s.occlusion_schedule.empty() || cfg.data.occlusion_prob <= 0.0 || s.num_frames < 3) return s;
  std::mt19937_64 rng(mix_seed(s.seed, 0x0CC));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (u(rng) >= cfg.data.occlusion_prob) return s;
  const int start = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(s.num_frames - 2));
  const int span = 1 + static_cast<int>(rng() % 2);
  const double fraction = cfg.data.occlusion_min + (cfg.data.occlusion_max - cfg.data.occlusion_min) * u(rng);
  for (int f = start; f < std::min(s.num_frames, start + span); ++f) s.occlusion_schedule[f] = fraction;
  return s;
}

}  // namespace stmd
