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

// Idea ranking from pairwise predictions: consistent comparisons award a win,
// inconsistent ones are dropped, and ideas are ranked by win count.

#ifndef IDEAFORECAST_RANKING_H_
#define IDEAFORECAST_RANKING_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ideaforecast/dataset.h"
#include "ideaforecast/predictor.h"
#include "json.hpp"

namespace ideaforecast {

inline constexpr int kMinRankingIdeas = 3;

struct Comparison {
  std::string idea_a;
  std::string idea_b;
  // Absent for an inconsistent (dropped) comparison.
  std::optional<std::string> winner;
};

// Competition ranking by descending value: equal values share a rank and the
// next rank skips ("1, 2, 2, 4").
std::map<std::string, int> CompetitionRanks(const std::map<std::string, double>& values);

// Dense ranking by descending value: equal values share a rank, no gaps.
std::map<std::string, int> DenseRanks(const std::map<std::string, double>& values);

struct LeaderboardRanking {
  std::string benchmark_id;
  std::map<std::string, int> wins;
  std::map<std::string, int> predicted_ranks;
  std::map<std::string, int> true_ranks;
  int total_comparisons = 0;
  int dropped_comparisons = 0;
  // C(n, 2) minus the comparisons that were provided.
  int missing_comparisons = 0;
  double rmse = 0.0;
  bool eligible_top1 = false;
  std::vector<Comparison> comparisons;
  std::optional<bool> top1_hit;
};

// Ranks `ideas` from `comparisons`. Throws DomainError for fewer than three
// ideas or a comparison naming an unknown idea.
LeaderboardRanking RankLeaderboard(std::span<const std::string> ideas,
                                   std::span<const Comparison> comparisons);

// RMSE between predicted and true ranks; fills the Top-1 fields too.
void ScoreRanking(LeaderboardRanking& ranking, const std::map<std::string, double>& true_scores);

struct RankingReport {
  std::vector<LeaderboardRanking> leaderboards;
  // Leaderboards skipped (fewer than three ideas), with the reason.
  std::vector<std::pair<std::string, std::string>> skipped;
  double consistency_rate = 0.0;
  std::optional<double> top1_accuracy;
  std::optional<double> median_rmse;
  int eligible_top1 = 0;
};

RankingReport AggregateRankings(std::vector<LeaderboardRanking> rankings,
                                std::vector<std::pair<std::string, std::string>> skipped);

// Groups ranking pairs (which must carry idea ids) by benchmark, judges each
// unit for consistency, ranks, and scores against dense ranks of the unified
// scores stored in the pairs. Throws DataError on missing idea ids, twins or
// predictions.
RankingReport RankFromPredictions(std::span<const IdeaPair> pairs,
                                  std::span<const Prediction> predictions);

double Median(std::vector<double> values);

nlohmann::ordered_json ToJson(const RankingReport& report, bool include_matrix = false);

}  // namespace ideaforecast

#endif  // IDEAFORECAST_RANKING_H_
