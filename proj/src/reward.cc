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

#include "ideaforecast/reward.h"

#include <cmath>
#include <numeric>

namespace ideaforecast {

RewardBreakdown ScoreResponse(const ParsedResponse& parsed, Label label,
                              const PenaltyConfig& penalty) {
  RewardBreakdown reward;
  const bool correct = parsed.answer.has_value() && *parsed.answer == label;
  reward.r_correct = correct ? kCorrectReward : -kCorrectReward;
  reward.r_format = kFormatTermReward * (parsed.think_present ? 1.0 : -1.0) +
                    kFormatTermReward * (parsed.answer_tag_present ? 1.0 : -1.0);
  if (penalty.enabled && parsed.char_length < penalty.min_chars) {
    reward.length_penalty = -penalty.magnitude;
  }
  reward.total = reward.r_correct + reward.r_format + reward.length_penalty;
  return reward;
}

AdvantageSet GroupAdvantages(const std::vector<double>& rewards, AdvantageMode mode) {
  if (rewards.size() < 2) {
    throw DomainError("group advantages need at least two rewards");
  }
  AdvantageSet set;
  set.group_rewards = rewards;
  set.mode = mode;
  const double n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double sum_sq = 0.0;
  for (const double r : rewards) sum_sq += (r - mean) * (r - mean);
  const double spread = std::sqrt(sum_sq / n);
  for (const double r : rewards) {
    double advantage = r - mean;
    if (mode == AdvantageMode::kCenteredScaled) {
      advantage = spread > 0.0 ? advantage / spread : 0.0;
    }
    set.advantages.push_back(advantage);
  }
  return set;
}

std::string AdvantageModeName(AdvantageMode mode) {
  return mode == AdvantageMode::kCenteredOnly ? "centered-only" : "centered-scaled";
}

nlohmann::ordered_json ToJson(const std::string& pair_id, const RewardBreakdown& reward) {
  return {{"pair_id", pair_id},
          {"r_correct", reward.r_correct},
          {"r_format", reward.r_format},
          {"length_penalty", reward.length_penalty},
          {"total", reward.total}};
}

}  // namespace ideaforecast
