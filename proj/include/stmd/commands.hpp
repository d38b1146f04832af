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

// Command implementations behind the `stmd` executable. Each returns a
// process exit code: 0 success, 1 internal failure, 2 usage or config error.

#include "stmd/config.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <optional>
#include <string>
#include <vector>

namespace stmd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

/// Bad invocation detected by a command (existing output, missing input...).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;
  bool force = false;
  int workers = 0;  // 0: all cores
  std::vector<std::string> overrides;

  std::optional<std::filesystem::path> data;        // gen-data output; generated in memory when absent
  std::optional<std::filesystem::path> checkpoint;  // eval
  std::string baseline;                             // eval: "", "static" or "oracle"
  std::string axis;                                 // ablate
  std::optional<std::filesystem::path> results;     // plot
};

/// Resolved configuration; --workers overrides train.workers when nonzero.
RunConfig resolve_config(const CommandOptions& opts);

/// Synthetic splits for a configuration, generated in parallel.
std::vector<SequenceSample> generate_split(const RunConfig& cfg, bool eval_split, int workers = 0);
/// Sequences under <dir>/<split>/seq_*, in name order.
std::vector<SequenceSample> load_split(const std::filesystem::path& dir, const std::string& split);

int cmd_gen_data(const CommandOptions& opts, std::ostream& log);
int cmd_train(const CommandOptions& opts, std::ostream& log);
int cmd_eval(const CommandOptions& opts, std::ostream& log);
int cmd_ablate(const CommandOptions& opts, std::ostream& log);
int cmd_plot(const CommandOptions& opts, std::ostream& log);
int cmd_schema(const CommandOptions& opts, std::ostream& out);

/// Rows of an ablation axis with the override each row applies.
std::vector<std::pair<std::string, std::string>> ablation_variants(const std::string& axis);

/// Runs `body`, mapping exceptions to exit codes and messages on `log`.
int run_guarded(const std::function<int()>& body, std::ostream& log);

}  // namespace stmd
