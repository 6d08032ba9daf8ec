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

// Verifiable reward for pairwise predictions and group-relative advantages.
//
//   total = correctness + format + length penalty
//   correctness = +3 if the extracted answer equals the label, else -3
//   format      = 0.5 * (think ? 1 : -1) + 0.5 * (answer tag ? 1 : -1)
//   penalty     = -magnitude if enabled and the response is shorter than the
//                 threshold (600 characters by default), else 0

#ifndef IDEAFORECAST_REWARD_H_
#define IDEAFORECAST_REWARD_H_

#include <string>
#include <vector>

#include "ideaforecast/common.h"
#include "ideaforecast/predictor.h"
#include "json.hpp"

namespace ideaforecast {

inline constexpr double kCorrectReward = 3.0;
inline constexpr double kFormatTermReward = 0.5;

struct PenaltyConfig {
  bool enabled = false;
  std::int64_t min_chars = 600;
  // Subtracted from the total; must be nonnegative.
  double magnitude = 1.0;
};

struct RewardBreakdown {
  double r_correct = 0.0;
  double r_format = 0.0;
  double length_penalty = 0.0;
  double total = 0.0;
};

// An absent answer counts as incorrect.
RewardBreakdown ScoreResponse(const ParsedResponse& parsed, Label label,
                              const PenaltyConfig& penalty = {});

enum class AdvantageMode { kCenteredScaled, kCenteredOnly };

struct AdvantageSet {
  std::vector<double> group_rewards;
  std::vector<double> advantages;
  AdvantageMode mode = AdvantageMode::kCenteredOnly;
};

// Centered-only: r - mean(r). Centered-scaled: (r - mean(r)) / std(r) with the
// population std, and 0 when std is 0. Throws DomainError for groups of fewer
// than two rewards.
AdvantageSet GroupAdvantages(const std::vector<double>& rewards, AdvantageMode mode);

std::string AdvantageModeName(AdvantageMode mode);

nlohmann::ordered_json ToJson(const std::string& pair_id, const RewardBreakdown& reward);

}  // namespace ideaforecast

#endif  // IDEAFORECAST_REWARD_H_
