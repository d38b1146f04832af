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

// stmd: synthetic data generation, training, evaluation, ablations and plots.

#include "stmd/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

void common_flags(CLI::App* cmd, stmd::CommandOptions& o, std::string& config) {
  cmd->add_option("--config", config, "JSON config file");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "base seed (overrides the config)");
  cmd->add_flag("--force", o.force, "overwrite existing outputs");
  cmd->add_option("--workers", o.workers, "worker threads (0: all cores)");
  cmd->add_option("--set", o.overrides, "config override key=value (repeatable)")->take_all()->allow_extra_args(false);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatio-temporal point-cloud single-object tracker"};
  app.require_subcommand(1);
  stmd::CommandOptions o;
  std::string config;
  std::string data;
  std::string checkpoint;
  std::string results;

  auto* gen = app.add_subcommand("gen-data", "write synthetic train/eval sequences and a manifest");
  common_flags(gen, o, config);

  auto* train = app.add_subcommand("train", "train a tracker; writes checkpoint.stmd and metrics.jsonl");
  common_flags(train, o, config);
  train->add_option("--data", data, "directory written by gen-data (default: generate in memory)");

  auto* eval = app.add_subcommand("eval", "one-pass evaluation; writes results/*.json and summary.json");
  common_flags(eval, o, config);
  eval->add_option("--data", data, "directory written by gen-data (default: generate in memory)");
  eval->add_option("--checkpoint", checkpoint, "trained checkpoint");
  eval->add_option("--baseline", o.baseline, "evaluate a baseline instead: static or oracle");

  auto* ablate = app.add_subcommand("ablate", "train and evaluate each variant of one axis; writes ablation.csv");
  common_flags(ablate, o, config);
  ablate->add_option("--data", data, "directory written by gen-data (default: generate in memory)");
  ablate->add_option("--axis", o.axis, "padding, sigma, memory or temporal")->required();

  auto* plot = app.add_subcommand("plot", "render curves and IoU traces to figures/*.png");
  common_flags(plot, o, config);
  plot->add_option("--results", results, "directory of result JSON files (default: <out>/results)");

  auto* schema = app.add_subcommand("schema", "print the config JSON schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? stmd::kExitOk : stmd::kExitUsage;
  }
  if (!config.empty()) o.config = config;
  if (!data.empty()) o.data = data;
  if (!checkpoint.empty()) o.checkpoint = checkpoint;
  if (!results.empty()) o.results = results;

  return stmd::run_guarded(
      [&]() {
        if (*gen) return stmd::cmd_gen_data(o, std::cerr);
        if (*train) return stmd::cmd_train(o, std::cerr);
        if (*eval) return stmd::cmd_eval(o, std::cerr);
        if (*ablate) return stmd::cmd_ablate(o, std::cerr);
        if (*plot) return stmd::cmd_plot(o, std::cerr);
        if (*schema) return stmd::cmd_schema(o, std::cout);
        return stmd::kExitUsage;
      },
      std::cerr);
}
