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

#include "stmd/plot.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "stmd_cli_test";

struct CliRun {
  int code = -1;
  std::string err;
};

CliRun stmd_run(const std::string& args) {
  fs::create_directories(kRoot);
  const fs::path log = kRoot / "stderr.txt";
  const std::string cmd = std::string(STMD_CLI_PATH) + " " + args + " >" + (kRoot / "stdout.txt").string() + " 2>" +
                          log.string();
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.err = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

fs::path fresh(const std::string& name) {
  const fs::path d = kRoot / name;
  fs::remove_all(d);
  return d;
}

const std::string kTiny =
    " --set data.train_sequences=3 --set data.eval_sequences=2 --set tracker.points=24 --set tracker.centers=8"
    " --set tracker.sa_neighbors=4 --set tracker.knn_k=3 --set tracker.top_k=4 --set tracker.width_spatial=4"
    " --set tracker.width_mid=6 --set tracker.width_out=8 --set tracker.heads=2 --set train.epochs=1"
    " --set train.batch_size=2 --seed 3 --workers 1";

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(stmd_run("").code, 2);
  EXPECT_EQ(stmd_run("frobnicate").code, 2);
  EXPECT_EQ(stmd_run("ablate --out " + fresh("noaxis").string()).code, 2);
  const CliRun bad_axis = stmd_run("ablate --axis colour --out " + fresh("badaxis").string());
  EXPECT_EQ(bad_axis.code, 2);
  EXPECT_NE(bad_axis.err.find("colour"), std::string::npos);
  EXPECT_EQ(stmd_run("gen-data --set tracker.sigmaa=1 --out " + fresh("badkey").string()).code, 2);
  EXPECT_EQ(stmd_run("gen-data --set tracker.sigma=-1 --out " + fresh("badval").string()).code, 2);
  EXPECT_EQ(stmd_run("eval --out " + fresh("nockpt").string()).code, 2);
  EXPECT_EQ(stmd_run("schema").code, 0);
}

TEST(Cli, GenDataDefaultCounts) {
  const fs::path out = fresh("gen_default");
  ASSERT_EQ(stmd_run("gen-data --seed 1 --out " + out.string()).code, 0);
  EXPECT_EQ(count_lines(out / "manifest.csv"), 351);
  int train = 0, eval = 0;
  for (const auto& e : fs::directory_iterator(out / "train")) train += e.is_directory();
  for (const auto& e : fs::directory_iterator(out / "eval")) eval += e.is_directory();
  EXPECT_EQ(train, 300);
  EXPECT_EQ(eval, 50);
}

TEST(Cli, GenDataIdempotentAndGuarded) {
  const fs::path a = fresh("gen_a"), b = fresh("gen_b");
  ASSERT_EQ(stmd_run("gen-data --seed 5 --set data.train_sequences=4 --set data.eval_sequences=2 --out " + a.string()).code, 0);
  ASSERT_EQ(stmd_run("gen-data --seed 5 --set data.train_sequences=4 --set data.eval_sequences=2 --out " + b.string()).code, 0);
  EXPECT_EQ(count_lines(a / "manifest.csv"), 7);
  EXPECT_EQ(slurp(a / "manifest.csv"), slurp(b / "manifest.csv"));
  EXPECT_EQ(slurp(a / "train/seq_0003/frame_005.xyz"), slurp(b / "train/seq_0003/frame_005.xyz"));
  EXPECT_EQ(slurp(a / "eval/seq_0001/boxes.csv"), slurp(b / "eval/seq_0001/boxes.csv"));

  const CliRun again = stmd_run("gen-data --seed 5 --out " + a.string());
  EXPECT_EQ(again.code, 2);
  EXPECT_NE(again.err.find("--force"), std::string::npos);
  ASSERT_EQ(stmd_run("gen-data --force --seed 5 --set data.train_sequences=4 --set data.eval_sequences=2 --out " + a.string()).code, 0);
  EXPECT_EQ(slurp(a / "manifest.csv"), slurp(b / "manifest.csv"));
}

TEST(Cli, UnwritablePathExitsTwo) {
  const CliRun r = stmd_run("gen-data --set data.train_sequences=1 --set data.eval_sequences=1 --out /proc/stmd_nope");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/proc/stmd_nope"), std::string::npos);
}

TEST(Cli, TrainEvalPlotPipeline) {
  const fs::path data = fresh("pipe_data"), run = fresh("pipe_run"), ev = fresh("pipe_eval");
  ASSERT_EQ(stmd_run("gen-data" + kTiny + " --out " + data.string()).code, 0);
  const CliRun tr = stmd_run("train" + kTiny + " --data " + data.string() + " --out " + run.string());
  ASSERT_EQ(tr.code, 0) << tr.err;
  EXPECT_TRUE(fs::exists(run / "checkpoint.stmd"));
  EXPECT_EQ(count_lines(run / "metrics.jsonl"), 1);

  // retraining with the same seed reproduces the checkpoint byte for byte
  const std::string first = slurp(run / "checkpoint.stmd");
  ASSERT_EQ(stmd_run("train" + kTiny + " --force --data " + data.string() + " --out " + run.string()).code, 0);
  EXPECT_EQ(slurp(run / "checkpoint.stmd"), first);

  const CliRun e = stmd_run("eval" + kTiny + " --data " + data.string() + " --checkpoint " +
                         (run / "checkpoint.stmd").string() + " --out " + ev.string());
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_TRUE(fs::exists(ev / "results/seq_0000.json"));
  EXPECT_TRUE(fs::exists(ev / "results/seq_0001.json"));
  EXPECT_TRUE(fs::exists(ev / "summary.json"));

  // a checkpoint from a different tracker shape is a version error
  const CliRun mismatch = stmd_run("eval" + kTiny + " --set tracker.window=4 --data " + data.string() + " --checkpoint " +
                                (run / "checkpoint.stmd").string() + " --force --out " + ev.string());
  EXPECT_EQ(mismatch.code, 2);

  ASSERT_EQ(stmd_run("plot --out " + ev.string()).code, 0);
  int figures = 0;
  for (const auto& f : fs::directory_iterator(ev / "figures")) figures += f.path().extension() == ".png";
  EXPECT_EQ(figures, 6);
  const auto img = stmd::read_png((ev / "figures/seq_0000_success.png").string());
  EXPECT_EQ(img.width, 640);
}

TEST(Cli, OracleBaselineAndPerfectCurve) {
  const fs::path ev = fresh("oracle_eval");
  ASSERT_EQ(stmd_run("eval --baseline oracle --seed 2 --set data.eval_sequences=1 --out " + ev.string()).code, 0);
  ASSERT_EQ(stmd_run("plot --out " + ev.string()).code, 0);
  const auto img = stmd::read_png((ev / "figures/seq_0000_success.png").string());
  stmd::ChartSpec spec;
  // the curve stays on the top edge for every threshold below 1
  for (double tau : {0.0, 0.25, 0.5, 0.75, 0.98}) {
    const auto [x, y] = stmd::chart_pixel(spec, tau, 1.0);
    EXPECT_EQ(img.get(x, y), 0x1f77b4u) << tau;
  }
}

TEST(Cli, PlotErrors) {
  const fs::path empty = fresh("plot_empty");
  fs::create_directories(empty / "results");
  EXPECT_EQ(stmd_run("plot --out " + empty.string()).code, 2);
  const fs::path bad = fresh("plot_bad");
  fs::create_directories(bad / "results");
  std::ofstream(bad / "results/seq_0007.json") << "{\"frames\": [";
  const CliRun r = stmd_run("plot --out " + bad.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("seq_0007.json"), std::string::npos);
}

TEST(Cli, AblationTables) {
  const fs::path out = fresh("ablate_pad");
  const CliRun r = stmd_run("ablate --axis padding" + kTiny + " --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(out / "ablation.csv").substr(0, 26), "variant,success,precision\n");
  EXPECT_EQ(count_lines(out / "ablation.csv"), 4);
  for (const char* v : {"none", "zero", "replicate"}) EXPECT_TRUE(fs::exists(out / "ablation/padding" / v / "checkpoint.stmd")) << v;
  const fs::path mem = fresh("ablate_mem");
  ASSERT_EQ(stmd_run("ablate --axis memory" + kTiny + " --out " + mem.string()).code, 0);
  std::ifstream in(mem / "ablation.csv");
  std::string header, on, off;
  std::getline(in, header);
  std::getline(in, on);
  std::getline(in, off);
  EXPECT_EQ(on.substr(0, 3), "on,");
  EXPECT_EQ(off.substr(0, 4), "off,");
}
