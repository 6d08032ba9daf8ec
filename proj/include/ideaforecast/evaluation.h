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

// Swap-consistency evaluation.
//
// A pair and its swapped twin form one unit. The unit is consistent when the
// predictor names the same underlying idea in both presentations, and counts
// as correct only when it is consistent and that idea is the better one.
// Missing answers make a unit inconsistent.

#ifndef IDEAFORECAST_EVALUATION_H_
#define IDEAFORECAST_EVALUATION_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ideaforecast/dataset.h"
#include "ideaforecast/predictor.h"
#include "json.hpp"

namespace ideaforecast {

struct PairVerdict {
  // The non-swapped twin's id, and its partner.
  std::string pair_id;
  std::string partner_id;
  bool consistent = false;
  bool correct_consistent = false;
  bool answered_both = false;
};

// One verdict per unit, sorted by pair_id. Throws DataError when a pair has no
// twin in `pairs` or a pair has no prediction; the message lists the ids.
std::vector<PairVerdict> JudgePairs(std::span<const Prediction> predictions,
                                    std::span<const IdeaPair> pairs);

struct TierStats {
  int units = 0;
  int consistent = 0;
  int correct = 0;
  double accuracy = 0.0;
};

struct EvalReport {
  double overall_accuracy = 0.0;
  double consistency_rate = 0.0;
  // Absent when no unit is consistent.
  std::optional<double> conditional_accuracy;
  std::map<SigmaTier, TierStats> per_tier;
  int units = 0;
  int consistent = 0;
  int correct = 0;
};

// Percentages in [0, 100]. Throws DataError for an empty verdict set or a
// verdict whose pair is not in `pairs`.
EvalReport Evaluate(std::span<const PairVerdict> verdicts, std::span<const IdeaPair> pairs);

enum class SubsetDimension { kLength, kRecency, kParaphrase };

std::string DimensionName(SubsetDimension dimension);

struct BootstrapResult {
  // Observed acc(A) - acc(B), percentage points.
  double delta_pp = 0.0;
  double mean_resampled_pp = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;
  int resamples = 0;
  std::uint64_t seed = 0;
};

struct SubsetDelta {
  SubsetDimension dimension = SubsetDimension::kLength;
  std::string name_a;
  std::string name_b;
  std::vector<std::string> ids_a;
  std::vector<std::string> ids_b;
  std::optional<double> accuracy_a;
  std::optional<double> accuracy_b;
  // Absent when either subset is empty.
  std::optional<double> delta_pp;
  // Recency only: pairs from the same year, and pairs with unknown years.
  std::vector<std::string> ids_same;
  std::optional<double> accuracy_same;
  int excluded = 0;
  std::optional<BootstrapResult> bootstrap;
};

// Length: longer-wins minus shorter-wins (equal lengths excluded).
// Recency: newer-wins minus older-wins (same-year reported separately).
SubsetDelta SubsetDeltas(std::span<const PairVerdict> verdicts,
                         std::span<const IdeaPair> pairs, SubsetDimension dimension);

// Paraphrased minus original accuracy over the units present in both.
SubsetDelta ParaphraseDelta(std::span<const PairVerdict> original,
                            std::span<const PairVerdict> paraphrased);

inline constexpr int kDefaultResamples = 10000;

// Resamples units with replacement within each subset and records
// acc*(A) - acc*(B). CI is the 2.5/97.5 percentile interval; the two-sided
// p-value is min(2 * P(delta* on the far side of 0), 1), computed with a +1
// correction so that it is never 0. Throws DataError for empty or
// overlapping subsets or ids without a verdict.
BootstrapResult BootstrapTest(std::span<const PairVerdict> verdicts,
                              std::span<const std::string> ids_a,
                              std::span<const std::string> ids_b, int resamples,
                              std::uint64_t seed);

// Paired variant: one resample of `ids` drives both verdict sets.
BootstrapResult PairedBootstrapTest(std::span<const PairVerdict> verdicts_a,
                                    std::span<const PairVerdict> verdicts_b,
                                    std::span<const std::string> ids, int resamples,
                                    std::uint64_t seed);

// "**" for p < 0.01, "*" for p < 0.05, else "".
std::string SignificanceMarker(double p_value);

// Linear-interpolation percentile of sorted values, q in [0, 100].
double Percentile(std::span<const double> sorted, double q);

nlohmann::ordered_json ToJson(const EvalReport& report);
nlohmann::ordered_json ToJson(const SubsetDelta& delta);
nlohmann::ordered_json ToJson(const BootstrapResult& result);
nlohmann::ordered_json ToJson(const PairVerdict& verdict);

}  // namespace ideaforecast

#endif  // IDEAFORECAST_EVALUATION_H_
