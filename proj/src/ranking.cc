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

#include "ideaforecast/ranking.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "ideaforecast/evaluation.h"

namespace ideaforecast {
namespace {

using nlohmann::ordered_json;

std::vector<std::pair<std::string, double>> SortedDescending(
    const std::map<std::string, double>& values) {
  std::vector<std::pair<std::string, double>> sorted(values.begin(), values.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return sorted;
}

}  // namespace

std::map<std::string, int> CompetitionRanks(const std::map<std::string, double>& values) {
  std::map<std::string, int> ranks;
  const auto sorted = SortedDescending(values);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const bool tied = i > 0 && sorted[i].second == sorted[i - 1].second;
    ranks[sorted[i].first] = tied ? ranks[sorted[i - 1].first] : static_cast<int>(i) + 1;
  }
  return ranks;
}

std::map<std::string, int> DenseRanks(const std::map<std::string, double>& values) {
  std::map<std::string, int> ranks;
  const auto sorted = SortedDescending(values);
  int rank = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i == 0 || sorted[i].second != sorted[i - 1].second) ++rank;
    ranks[sorted[i].first] = rank;
  }
  return ranks;
}

LeaderboardRanking RankLeaderboard(std::span<const std::string> ideas,
                                   std::span<const Comparison> comparisons) {
  const std::set<std::string> unique(ideas.begin(), ideas.end());
  if (unique.size() < static_cast<std::size_t>(kMinRankingIdeas)) {
    throw DomainError("ranking needs at least " + std::to_string(kMinRankingIdeas) +
                      " ideas");
  }
  LeaderboardRanking ranking;
  for (const auto& id : unique) ranking.wins[id] = 0;
  std::set<std::pair<std::string, std::string>> seen;
  for (const Comparison& c : comparisons) {
    if (!unique.count(c.idea_a) || !unique.count(c.idea_b)) {
      throw DomainError("comparison names an idea outside the leaderboard");
    }
    ++ranking.total_comparisons;
    seen.insert(std::minmax(c.idea_a, c.idea_b));
    if (!c.winner) {
      ++ranking.dropped_comparisons;
      continue;
    }
    if (*c.winner != c.idea_a && *c.winner != c.idea_b) {
      throw DomainError("comparison winner is not one of its ideas");
    }
    ++ranking.wins[*c.winner];
  }
  const int n = static_cast<int>(unique.size());
  ranking.missing_comparisons = std::max(0, n * (n - 1) / 2 - static_cast<int>(seen.size()));
  std::map<std::string, double> win_values;
  for (const auto& [id, w] : ranking.wins) win_values[id] = w;
  ranking.predicted_ranks = CompetitionRanks(win_values);
  ranking.comparisons.assign(comparisons.begin(), comparisons.end());
  return ranking;
}

void ScoreRanking(LeaderboardRanking& ranking, const std::map<std::string, double>& true_scores) {
  std::map<std::string, double> scores;
  for (const auto& [id, rank] : ranking.predicted_ranks) {
    const auto it = true_scores.find(id);
    if (it == true_scores.end()) throw DataError("no true score for idea " + id);
    scores[id] = it->second;
  }
  ranking.true_ranks = DenseRanks(scores);
  double sum_sq = 0.0;
  std::set<int> distinct;
  for (const auto& [id, predicted] : ranking.predicted_ranks) {
    const double diff = ranking.true_ranks.at(id) - predicted;
    sum_sq += diff * diff;
    distinct.insert(predicted);
  }
  ranking.rmse = std::sqrt(sum_sq / static_cast<double>(ranking.predicted_ranks.size()));
  ranking.eligible_top1 = distinct.size() >= 2;
  ranking.top1_hit.reset();
  if (ranking.eligible_top1) {
    bool hit = false;
    for (const auto& [id, true_rank] : ranking.true_ranks) {
      if (true_rank == 1 && ranking.predicted_ranks.at(id) == 1) hit = true;
    }
    ranking.top1_hit = hit;
  }
}

double Median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
}

RankingReport AggregateRankings(std::vector<LeaderboardRanking> rankings,
                                std::vector<std::pair<std::string, std::string>> skipped) {
  RankingReport report;
  report.skipped = std::move(skipped);
  int total = 0, dropped = 0, hits = 0;
  std::vector<double> rmses;
  for (const auto& r : rankings) {
    total += r.total_comparisons;
    dropped += r.dropped_comparisons;
    rmses.push_back(r.rmse);
    if (r.eligible_top1) {
      ++report.eligible_top1;
      hits += r.top1_hit.value_or(false) ? 1 : 0;
    }
  }
  report.consistency_rate =
      total == 0 ? 0.0 : 100.0 * (1.0 - static_cast<double>(dropped) / total);
  if (report.eligible_top1 > 0) {
    report.top1_accuracy = 100.0 * hits / report.eligible_top1;
  }
  if (!rmses.empty()) report.median_rmse = Median(rmses);
  report.leaderboards = std::move(rankings);
  return report;
}

RankingReport RankFromPredictions(std::span<const IdeaPair> pairs,
                                  std::span<const Prediction> predictions) {
  for (const auto& pair : pairs) {
    if (!pair.idea_a_id || !pair.idea_b_id) {
      throw DataError("ranking pair " + pair.pair_id + " lacks idea ids");
    }
  }
  const std::vector<PairVerdict> verdicts = JudgePairs(predictions, pairs);
  std::map<std::string, const IdeaPair*> by_id;
  for (const auto& pair : pairs) by_id[pair.pair_id] = &pair;
  std::map<std::string, const Prediction*> by_prediction;
  for (const auto& p : predictions) by_prediction[p.pair_id] = &p;

  struct Board {
    std::set<std::string> ideas;
    std::map<std::string, double> scores;
    std::vector<Comparison> comparisons;
  };
  std::map<std::string, Board> boards;
  for (const PairVerdict& v : verdicts) {
    const IdeaPair& pair = *by_id.at(v.pair_id);
    Board& board = boards[pair.benchmark_id];
    board.ideas.insert(*pair.idea_a_id);
    board.ideas.insert(*pair.idea_b_id);
    board.scores[*pair.idea_a_id] = pair.meta.score_a;
    board.scores[*pair.idea_b_id] = pair.meta.score_b;
    Comparison c{*pair.idea_a_id, *pair.idea_b_id, std::nullopt};
    if (v.consistent) {
      const Label answer = *by_prediction.at(pair.pair_id)->parsed.answer;
      c.winner = answer == Label::kIdeaA ? *pair.idea_a_id : *pair.idea_b_id;
    }
    board.comparisons.push_back(std::move(c));
  }

  std::vector<LeaderboardRanking> rankings;
  std::vector<std::pair<std::string, std::string>> skipped;
  for (auto& [benchmark, board] : boards) {
    if (board.ideas.size() < static_cast<std::size_t>(kMinRankingIdeas)) {
      skipped.emplace_back(benchmark, "fewer than 3 ideas");
      continue;
    }
    const std::vector<std::string> ideas(board.ideas.begin(), board.ideas.end());
    LeaderboardRanking ranking = RankLeaderboard(ideas, board.comparisons);
    ranking.benchmark_id = benchmark;
    ScoreRanking(ranking, board.scores);
    rankings.push_back(std::move(ranking));
  }
  return AggregateRankings(std::move(rankings), std::move(skipped));
}

nlohmann::ordered_json ToJson(const RankingReport& report, bool include_matrix) {
  auto optional = [](const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json boards = ordered_json::array();
  for (const auto& r : report.leaderboards) {
    ordered_json ideas = ordered_json::array();
    for (const auto& [id, predicted] : r.predicted_ranks) {
      ideas.push_back({{"idea_id", id},
                       {"wins", r.wins.at(id)},
                       {"predicted_rank", predicted},
                       {"true_rank", r.true_ranks.at(id)}});
    }
    ordered_json board = {{"benchmark_id", r.benchmark_id},
                          {"comparisons", r.total_comparisons},
                          {"dropped_comparisons", r.dropped_comparisons},
                          {"missing_comparisons", r.missing_comparisons},
                          {"rmse", r.rmse},
                          {"eligible_top1", r.eligible_top1},
                          {"top1_hit", r.top1_hit ? ordered_json(*r.top1_hit)
                                                  : ordered_json(nullptr)},
                          {"ideas", ideas}};
    if (include_matrix) {
      // matrix[a][b]: 1 if a beat b, 0 if b beat a, null when dropped.
      ordered_json matrix = ordered_json::object();
      for (const Comparison& c : r.comparisons) {
        const ordered_json a_won =
            c.winner ? ordered_json(*c.winner == c.idea_a ? 1 : 0) : ordered_json(nullptr);
        const ordered_json b_won =
            c.winner ? ordered_json(*c.winner == c.idea_b ? 1 : 0) : ordered_json(nullptr);
        matrix[c.idea_a][c.idea_b] = a_won;
        matrix[c.idea_b][c.idea_a] = b_won;
      }
      board["comparison_matrix"] = matrix;
    }
    boards.push_back(std::move(board));
  }
  ordered_json skipped = ordered_json::array();
  for (const auto& [id, reason] : report.skipped) {
    skipped.push_back({{"benchmark_id", id}, {"reason", reason}});
  }
  return {{"aggregate",
           {{"leaderboards", report.leaderboards.size()},
            {"consistency_rate", report.consistency_rate},
            {"top1_accuracy", optional(report.top1_accuracy)},
            {"eligible_top1", report.eligible_top1},
            {"median_rmse", optional(report.median_rmse)}}},
          {"leaderboards", boards},
          {"skipped", skipped}};
}

}  // namespace ideaforecast
