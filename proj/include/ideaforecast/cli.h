/*
 * Copyright 2026 The ideaforecast Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Pipeline commands behind the `ideaforecast` executable.

#ifndef IDEAFORECAST_CLI_H_
#define IDEAFORECAST_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ideaforecast/dataset.h"
#include "ideaforecast/predictor.h"
#include "ideaforecast/reward.h"
#include "json.hpp"

namespace ideaforecast {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitDataError = 2,
  kExitBackendFailure = 3,
};

// Every default reproduces the constants of the method: sigma windows
// [0.8, 1.2] / [1.8, 2.2] / [2.8, 3.2], 10,000 bootstrap resamples, 10
// calibration bins, a 600-character short-response threshold.
struct RunConfig {
  std::filesystem::path input_dir;
  std::filesystem::path dataset;
  std::filesystem::path predictions;
  std::filesystem::path output;
  std::uint64_t seed = 0;
  SigmaWindows sigma_windows;

  PenaltyConfig penalty;
  AdvantageMode advantage_mode = AdvantageMode::kCenteredOnly;

  // "replay:<file>", "baseline:<strategy>" or "remote".
  std::string backend;
  RemoteConfig remote;
  int concurrency = 4;
  std::filesystem::path cache_dir;
  RetryPolicy retry;

  int bootstrap_resamples = 10000;
  std::uint64_t bootstrap_seed = 0;
  std::filesystem::path paraphrase_dataset;
  std::filesystem::path paraphrase_predictions;

  int bin_count = 10;
  bool debiased = true;

  bool comparison_matrix = false;
};

// Applies a JSON config document on top of `config`. Throws DataError on
// malformed values.
void ApplyConfigJson(const nlohmann::json& document, RunConfig& config);
RunConfig LoadConfigFile(const std::filesystem::path& path, RunConfig base = {});

// Each command writes its files under config.output and returns an ExitCode.
// Errors are reported on `err` as a one-line JSON document.
int CommandBuildDataset(const RunConfig& config, std::ostream& out, std::ostream& err);
int CommandPredict(const RunConfig& config, std::ostream& out, std::ostream& err);
int CommandEvaluate(const RunConfig& config, std::ostream& out, std::ostream& err);
int CommandCalibrate(const RunConfig& config, std::ostream& out, std::ostream& err);
int CommandRank(const RunConfig& config, std::ostream& out, std::ostream& err);
int CommandRewardScore(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses the command line (program name first) and dispatches.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ideaforecast

#endif  // IDEAFORECAST_CLI_H_
