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

// Unified Scores and rank/score discordance removal.
//
// A leaderboard's unified score for an entry is the mean, over every metric
// reported by all entries, of the min-max normalized value. Metrics whose
// normalized values correlate positively with rank (higher value = worse rank)
// are inverted first. Constant metrics carry no ranking signal and are dropped.

#ifndef IDEAFORECAST_SCORING_H_
#define IDEAFORECAST_SCORING_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ideaforecast/ingest.h"
#include "json.hpp"

namespace ideaforecast {

enum class MetricDirection { kAsIs, kInverted };

struct MetricMatrix {
  std::string benchmark_id;
  std::vector<std::string> metric_names;
  // values[entry][metric], normalized and direction-corrected, in [0, 1].
  std::vector<std::vector<double>> values;
  std::vector<MetricDirection> directions;
};

struct UnifiedScore {
  std::string entry_id;
  double score = 0.0;
  int source_rank = 1;
};

struct ScoringResult {
  std::string benchmark_id;
  // Set when the benchmark cannot be scored; `scores` is then empty.
  std::optional<std::string> skip_reason;
  MetricMatrix matrix;
  // Metrics excluded before averaging, with the reason.
  std::vector<std::pair<std::string, std::string>> dropped_metrics;
  // In leaderboard entry order.
  std::vector<UnifiedScore> scores;
};

// Pearson correlation; 0 when either column has zero variance.
double PearsonCorrelation(std::span<const double> x, std::span<const double> y);

// Min-max normalization; nullopt when max == min.
std::optional<std::vector<double>> MinMaxNormalize(std::span<const double> values);

// Throws DomainError for fewer than two entries. A benchmark without any
// usable metric is reported through `skip_reason`.
ScoringResult ComputeUnifiedScores(const Leaderboard& leaderboard);

// Fraction of entry pairs whose rank order and score order strictly disagree.
// Throws DomainError for fewer than two entries.
double DiscordanceFraction(std::span<const UnifiedScore> entries);

struct Removal {
  std::string entry_id;
  // 1-based loop iteration that removed the entry.
  int iteration = 0;
  int discordant_pairs = 0;
};

struct PruneResult {
  std::vector<UnifiedScore> kept;
  std::vector<Removal> removals;
  double initial_fraction = 0.0;
  double final_fraction = 0.0;
};

// Repeatedly removes the entry involved in the most discordant pairs until no
// discordant pair is left or fewer than two entries remain. Ties go to the
// entry with the worst source rank, then the lower score, then the larger
// entry_id. Throws DomainError for fewer than two entries.
PruneResult PruneDiscordant(std::span<const UnifiedScore> entries);

nlohmann::json ToJson(const ScoringResult& result, const PruneResult* prune);

}  // namespace ideaforecast

#endif  // IDEAFORECAST_SCORING_H_
