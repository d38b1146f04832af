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

#include "stmd/commands.hpp"

#include "stmd/core_data.hpp"
#include "stmd/errors.hpp"
#include "stmd/parallel.hpp"
#include "stmd/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

namespace stmd {

namespace fs = std::filesystem;

namespace {

std::string seq_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "seq_%04d", i);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

bool non_empty_dir(const fs::path& p) { return fs::is_directory(p) && !fs::is_empty(p); }

void make_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw UsageError("cannot create directory " + p.string() + ": " + ec.message());
  // writability probe
  const fs::path probe = p / ".stmd_write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw UsageError("directory " + p.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

// Refuses to touch existing outputs unless forced; forced outputs are removed first.
void claim_outputs(const fs::path& out, const std::vector<std::string>& entries, bool force) {
  for (const auto& e : entries) {
    const fs::path p = out / e;
    if (!fs::exists(p)) continue;
    if (!force) throw UsageError(p.string() + " already exists (pass --force to overwrite)");
    fs::remove_all(p);
  }
  make_dir(out);
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

nlohmann::ordered_json epoch_json(const EpochRecord& r) {
  nlohmann::ordered_json j = {{"epoch", r.epoch},       {"step", r.step},   {"lr", r.learning_rate},
                              {"loss", r.mean_loss},    {"mask", r.mask},   {"vote", r.vote},
                              {"objectness", r.objectness}, {"box", r.box}};
  j["success"] = r.eval ? nlohmann::ordered_json(r.eval->success) : nlohmann::ordered_json(nullptr);
  j["precision"] = r.eval ? nlohmann::ordered_json(r.eval->precision) : nlohmann::ordered_json(nullptr);
  return j;
}

struct Datasets {
  std::vector<SequenceSample> train;
  std::vector<SequenceSample> eval;
};

Datasets datasets(const CommandOptions& opts, const RunConfig& cfg, bool need_train) {
  Datasets d;
  if (opts.data) {
    if (need_train) d.train = load_split(*opts.data, "train");
    d.eval = load_split(*opts.data, "eval");
  } else {
    if (need_train) d.train = generate_split(cfg, false, cfg.train.workers);
    d.eval = generate_split(cfg, true, cfg.train.workers);
  }
  if (need_train && d.train.empty()) throw UsageError("no training sequences");
  return d;
}

struct TrainedRun {
  TrainOutcome outcome;
  Summary eval;
};

TrainedRun train_to(const RunConfig& cfg, const Datasets& data, const fs::path& dir, std::ostream& log,
                    const std::string& tag) {
  TrackerNet net(cfg.tracker);
  std::ostringstream metrics;
  TrainedRun run;
  run.outcome = train_loop(net, cfg.train, data.train, data.eval, [&](const EpochRecord& r) {
    metrics << epoch_json(r).dump() << '\n';
    log << tag << "epoch " << r.epoch << "/" << cfg.train.epochs << " loss " << fixed(r.mean_loss);
    if (r.eval) log << " success " << fixed(r.eval->success) << " precision " << fixed(r.eval->precision);
    log << std::endl;
  });
  save_checkpoint(dir / "checkpoint.stmd", net, static_cast<std::uint64_t>(run.outcome.steps), cfg.seed);
  write_text(dir / "metrics.jsonl", metrics.str());
  write_text(dir / "config.json", to_json(cfg).dump(2) + "\n");
  if (!data.eval.empty()) {
    const StmdTracker tracker(net);
    run.eval = summarize(run_ope_batch(tracker, data.eval, cfg.train.workers));
  }
  return run;
}

}  // namespace

RunConfig resolve_config(const CommandOptions& opts) {
  if (opts.workers < 0) throw UsageError("--workers must be >= 0");
  RunConfig cfg = load_run_config(opts.config, opts.overrides, opts.seed);
  if (opts.workers > 0) cfg.train.workers = opts.workers;
  return cfg;
}

std::vector<SequenceSample> generate_split(const RunConfig& cfg, bool eval_split, int workers) {
  const int n = eval_split ? cfg.data.eval_sequences : cfg.data.train_sequences;
  std::vector<SequenceSample> out(static_cast<std::size_t>(n));
  parallel_for_dynamic(
      n, [&](std::int64_t i) { out[i] = generate_synthetic_sequence(sequence_scenario(cfg, eval_split, static_cast<int>(i))); },
      workers);
  return out;
}

std::vector<SequenceSample> load_split(const fs::path& dir, const std::string& split) {
  const fs::path root = dir / split;
  if (!fs::is_directory(root)) throw UsageError("missing data split " + root.string());
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && e.path().filename().string().rfind("seq_", 0) == 0) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<SequenceSample> out;
  for (const auto& d : dirs) out.push_back(read_sequence_dir(d));
  return out;
}

std::vector<std::pair<std::string, std::string>> ablation_variants(const std::string& axis) {
  if (axis == "padding") {
    return {{"none", "tracker.padding=none"}, {"zero", "tracker.padding=zero"},
            {"replicate", "tracker.padding=replicate"}};
  }
  if (axis == "sigma") {
    return {{"0.5", "tracker.sigma=0.5"}, {"1.0", "tracker.sigma=1.0"}, {"1.5", "tracker.sigma=1.5"},
            {"2.0", "tracker.sigma=2.0"}};
  }
  if (axis == "memory") return {{"on", "tracker.memory=bidirectional"}, {"off", "tracker.memory=last_frame"}};
  if (axis == "temporal") return {{"on", "tracker.temporal_enabled=true"}, {"off", "tracker.temporal_enabled=false"}};
  throw UsageError("unknown ablation axis '" + axis + "' (expected padding, sigma, memory or temporal)");
}

int cmd_gen_data(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  if (non_empty_dir(opts.out) && !opts.force) {
    throw UsageError(opts.out.string() + " is not empty (pass --force to overwrite)");
  }
  claim_outputs(opts.out, {"train", "eval", "manifest.csv", "config.json"}, opts.force);
  std::string manifest = "split,index,dir,seed,occluded_frames\n";
  for (const bool eval_split : {false, true}) {
    const std::string split = eval_split ? "eval" : "train";
    const int n = eval_split ? cfg.data.eval_sequences : cfg.data.train_sequences;
    make_dir(opts.out / split);
    std::vector<ScenarioConfig> scen;
    for (int i = 0; i < n; ++i) scen.push_back(sequence_scenario(cfg, eval_split, i));
    parallel_for_dynamic(
        n,
        [&](std::int64_t i) {
          write_sequence_dir(generate_synthetic_sequence(scen[i]), opts.out / split / seq_name(static_cast<int>(i)));
        },
        cfg.train.workers);
    for (int i = 0; i < n; ++i) {
      std::string occ;
      for (const auto& [f, frac] : scen[static_cast<std::size_t>(i)].occlusion_schedule) {
        occ += (occ.empty() ? "" : ";") + std::to_string(f) + ":" + fixed(frac, 3);
      }
      manifest += split + "," + std::to_string(i) + "," + split + "/" + seq_name(i) + "," +
                  std::to_string(scen[static_cast<std::size_t>(i)].seed) + "," + occ + "\n";
    }
    log << "wrote " << n << " " << split << " sequences" << std::endl;
  }
  write_text(opts.out / "manifest.csv", manifest);
  write_text(opts.out / "config.json", to_json(cfg).dump(2) + "\n");
  return kExitOk;
}

int cmd_train(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  claim_outputs(opts.out, {"checkpoint.stmd", "metrics.jsonl", "config.json"}, opts.force);
  const Datasets data = datasets(opts, cfg, true);
  log << "training on " << data.train.size() << " sequences, evaluating on " << data.eval.size() << std::endl;
  const TrainedRun run = train_to(cfg, data, opts.out, log, "");
  log << "best checkpoint: success " << fixed(run.eval.success) << " precision " << fixed(run.eval.precision)
      << " -> " << (opts.out / "checkpoint.stmd").string() << std::endl;
  return kExitOk;
}

int cmd_eval(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  const std::string name = opts.baseline.empty() ? "stmd" : opts.baseline;
  if (name != "stmd" && name != "static" && name != "oracle") {
    throw UsageError("unknown baseline '" + name + "' (expected static or oracle)");
  }
  if (name == "stmd" && !opts.checkpoint) throw UsageError("eval needs --checkpoint (or --baseline)");
  std::unique_ptr<TrackerNet> net;
  std::unique_ptr<Tracker> tracker;
  if (name == "stmd") {
    net = std::make_unique<TrackerNet>(cfg.tracker);
    apply_checkpoint(*net, load_checkpoint(*opts.checkpoint, cfg.tracker));
    tracker = std::make_unique<StmdTracker>(*net);
  } else if (name == "static") {
    tracker = std::make_unique<StaticTracker>();
  } else {
    tracker = std::make_unique<OracleTracker>();
  }
  const Datasets data = datasets(opts, cfg, false);
  if (data.eval.empty()) throw UsageError("no evaluation sequences");
  claim_outputs(opts.out, {"results", "summary.json"}, opts.force);
  const auto results = run_ope_batch(*tracker, data.eval, cfg.train.workers);
  make_dir(opts.out / "results");
  for (std::size_t i = 0; i < results.size(); ++i) {
    write_text(opts.out / "results" / (seq_name(static_cast<int>(i)) + ".json"), results[i].to_json().dump() + "\n");
  }
  const Summary s = summarize(results);
  std::size_t frames = 0;
  for (const auto& r : results) frames += r.boxes.size();
  const nlohmann::ordered_json summary = {{"tracker", name},
                                          {"sequences", results.size()},
                                          {"frames", frames},
                                          {"success", s.success},
                                          {"precision", s.precision}};
  write_text(opts.out / "summary.json", summary.dump(2) + "\n");
  log << std::left << std::setw(10) << "tracker" << std::setw(11) << "sequences" << std::setw(10) << "success"
      << "precision\n"
      << std::setw(10) << name << std::setw(11) << results.size() << std::setw(10) << fixed(100 * s.success, 2)
      << fixed(100 * s.precision, 2) << std::endl;
  return kExitOk;
}

int cmd_ablate(const CommandOptions& opts, std::ostream& log) {
  const auto variants = ablation_variants(opts.axis);
  const RunConfig base = resolve_config(opts);
  claim_outputs(opts.out, {"ablation.csv", "ablation"}, opts.force);
  const Datasets data = datasets(opts, base, true);
  if (data.eval.empty()) throw UsageError("ablation needs evaluation sequences");
  std::string csv = "variant,success,precision\n";
  for (const auto& [label, assignment] : variants) {
    CommandOptions vo = opts;
    vo.overrides.push_back(assignment);
    const RunConfig cfg = resolve_config(vo);
    const fs::path dir = opts.out / "ablation" / opts.axis / label;
    make_dir(dir);
    const TrainedRun run = train_to(cfg, data, dir, log, "[" + opts.axis + "=" + label + "] ");
    csv += label + "," + fixed(run.eval.success, 6) + "," + fixed(run.eval.precision, 6) + "\n";
  }
  write_text(opts.out / "ablation.csv", csv);
  log << csv;
  return kExitOk;
}

int cmd_plot(const CommandOptions& opts, std::ostream& log) {
  const fs::path dir = opts.results.value_or(opts.out / "results");
  if (!fs::is_directory(dir)) throw UsageError("results directory " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw UsageError("no result files in " + dir.string());

  std::vector<std::pair<std::string, TrackResult>> results;
  for (const auto& f : files) {
    std::ifstream in(f);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(f.string(), 0, e.what());
    }
    results.emplace_back(f.stem().string(), TrackResult::from_json(j, f.string()));
  }
  claim_outputs(opts.out, {"figures"}, opts.force);
  make_dir(opts.out / "figures");
  std::vector<double> grid_iou(kThresholdCount), grid_dist(kThresholdCount);
  for (int k = 0; k < kThresholdCount; ++k) {
    grid_iou[static_cast<std::size_t>(k)] = k / 100.0;
    grid_dist[static_cast<std::size_t>(k)] = 2.0 * k / 100.0;
  }
  for (const auto& [stem, r] : results) {
    const fs::path base = opts.out / "figures" / stem;
    ChartSpec unit;
    write_png(base.string() + "_success.png", render_chart(unit, {{grid_iou, success_curve(r.ious), 0x1f77b4}}));
    ChartSpec dist;
    dist.x_max = 2.0;
    write_png(base.string() + "_precision.png",
              render_chart(dist, {{grid_dist, precision_curve(r.distances), 0xd62728}}));
    ChartSpec trace;
    trace.x_max = std::max<double>(1.0, static_cast<double>(r.ious.size() - 1));
    trace.x_ticks = std::max(1, std::min(10, static_cast<int>(r.ious.size()) - 1));
    std::vector<double> frames(r.ious.size());
    for (std::size_t i = 0; i < frames.size(); ++i) frames[i] = static_cast<double>(i);
    write_png(base.string() + "_iou.png", render_chart(trace, {{frames, r.ious, 0x2ca02c}}));
  }
  log << "wrote " << 3 * results.size() << " figures to " << (opts.out / "figures").string() << std::endl;
  return kExitOk;
}

int cmd_schema(const CommandOptions&, std::ostream& out) {
  out << config_schema().dump(2) << std::endl;
  return kExitOk;
}

int run_guarded(const std::function<int()>& body, std::ostream& log) {
  try {
    return body();
  } catch (const UsageError& e) {
    log << "error: " << e.what() << std::endl;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << std::endl;
  } catch (const ParseError& e) {
    log << "parse error: " << e.what() << std::endl;
  } catch (const VersionError& e) {
    log << "version error: " << e.what() << std::endl;
  } catch (const ChecksumError& e) {
    log << "checksum error: " << e.what() << std::endl;
  } catch (const FormatError& e) {
    log << "format error: " << e.what() << std::endl;
  } catch (const ArgumentError& e) {
    log << "invalid argument: " << e.what() << std::endl;
  } catch (const fs::filesystem_error& e) {
    log << "filesystem error: " << e.what() << std::endl;
  } catch (const std::exception& e) {
    log << "internal error: " << e.what() << std::endl;
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace stmd
