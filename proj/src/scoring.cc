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

#include "ideaforecast/scoring.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "ideaforecast/common.h"

namespace ideaforecast {
namespace {

// A better (smaller) rank should carry a higher score.
bool Discordant(const UnifiedScore& a, const UnifiedScore& b) {
  return (a.source_rank < b.source_rank && a.score < b.score) ||
         (a.source_rank > b.source_rank && a.score > b.score);
}

// Discordant-pair participation count per entry, plus the total.
std::pair<std::vector<int>, int> CountDiscordance(
    std::span<const UnifiedScore> entries) {
  std::vector<int> counts(entries.size(), 0);
  int total = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t j = i + 1; j < entries.size(); ++j) {
      if (Discordant(entries[i], entries[j])) {
        ++counts[i];
        ++counts[j];
        ++total;
      }
    }
  }
  return {std::move(counts), total};
}

double PairFraction(int discordant, std::size_t n) {
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(discordant) / pairs;
}

}  // namespace

double PearsonCorrelation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) {
    throw DomainError("correlation needs two columns of equal, nonzero length");
  }
  const double n = static_cast<double>(x.size());
  const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double cov = 0.0, var_x = 0.0, var_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    cov += dx * dy;
    var_x += dx * dx;
    var_y += dy * dy;
  }
  if (var_x == 0.0 || var_y == 0.0) return 0.0;
  return cov / std::sqrt(var_x * var_y);
}

std::optional<std::vector<double>> MinMaxNormalize(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  const double max = *hi;
  if (!(max > min)) return std::nullopt;
  std::vector<double> out;
  out.reserve(values.size());
  for (const double v : values) {
    out.push_back(std::clamp((v - min) / (max - min), 0.0, 1.0));
  }
  return out;
}

ScoringResult ComputeUnifiedScores(const Leaderboard& leaderboard) {
  if (leaderboard.entries.size() < 2) {
    throw DomainError("benchmark " + leaderboard.benchmark_id +
                      " needs at least two entries to score");
  }
  ScoringResult result;
  result.benchmark_id = leaderboard.benchmark_id;
  result.matrix.benchmark_id = leaderboard.benchmark_id;

  std::map<std::string, int> coverage;
  for (const auto& entry : leaderboard.entries) {
    for (const auto& [name, value] : entry.metrics) ++coverage[name];
  }
  std::vector<double> ranks;
  for (const auto& entry : leaderboard.entries) {
    ranks.push_back(static_cast<double>(entry.rank));
  }

  const std::size_t n = leaderboard.entries.size();
  std::vector<std::vector<double>> columns;
  for (const auto& [name, count] : coverage) {
    if (static_cast<std::size_t>(count) != n) {
      result.dropped_metrics.emplace_back(name, "not reported by every entry");
      continue;
    }
    std::vector<double> raw;
    for (const auto& entry : leaderboard.entries) raw.push_back(entry.metrics.at(name));
    auto normalized = MinMaxNormalize(raw);
    if (!normalized) {
      result.dropped_metrics.emplace_back(name, "constant column");
      continue;
    }
    MetricDirection direction = MetricDirection::kAsIs;
    if (PearsonCorrelation(*normalized, ranks) > 0.0) {
      direction = MetricDirection::kInverted;
      for (double& v : *normalized) v = 1.0 - v;
    }
    result.matrix.metric_names.push_back(name);
    result.matrix.directions.push_back(direction);
    columns.push_back(std::move(*normalized));
  }

  if (columns.empty()) {
    const bool any_universal =
        std::any_of(result.dropped_metrics.begin(), result.dropped_metrics.end(),
                    [](const auto& d) { return d.second == "constant column"; });
    result.skip_reason =
        any_universal ? "only constant metrics" : "no universally reported metric";
    return result;
  }

  result.matrix.values.assign(n, std::vector<double>(columns.size()));
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < columns.size(); ++k) {
      result.matrix.values[i][k] = columns[k][i];
      sum += columns[k][i];
    }
    const auto& entry = leaderboard.entries[i];
    result.scores.push_back(
        {entry.entry_id, std::clamp(sum / static_cast<double>(columns.size()), 0.0, 1.0),
         entry.rank});
  }
  return result;
}

double DiscordanceFraction(std::span<const UnifiedScore> entries) {
  if (entries.size() < 2) {
    throw DomainError("discordance needs at least two entries");
  }
  return PairFraction(CountDiscordance(entries).second, entries.size());
}

PruneResult PruneDiscordant(std::span<const UnifiedScore> entries) {
  if (entries.size() < 2) {
    throw DomainError("discordance removal needs at least two entries");
  }
  PruneResult result;
  result.kept.assign(entries.begin(), entries.end());
  auto [counts, total] = CountDiscordance(result.kept);
  result.initial_fraction = PairFraction(total, result.kept.size());
  int iteration = 0;
  while (total > 0 && result.kept.size() >= 2) {
    ++iteration;
    std::size_t victim = 0;
    for (std::size_t i = 1; i < result.kept.size(); ++i) {
      const auto& a = result.kept[i];
      const auto& b = result.kept[victim];
      // Larger key wins: more discordant pairs, worse rank, lower score, larger id.
      if (std::make_tuple(counts[i], a.source_rank, -a.score, a.entry_id) >
          std::make_tuple(counts[victim], b.source_rank, -b.score, b.entry_id)) {
        victim = i;
      }
    }
    result.removals.push_back({result.kept[victim].entry_id, iteration, counts[victim]});
    result.kept.erase(result.kept.begin() + static_cast<std::ptrdiff_t>(victim));
    std::tie(counts, total) = CountDiscordance(result.kept);
  }
  result.final_fraction =
      result.kept.size() >= 2 ? PairFraction(total, result.kept.size()) : 0.0;
  return result;
}

nlohmann::json ToJson(const ScoringResult& result, const PruneResult* prune) {
  using nlohmann::json;
  json out = {{"benchmark_id", result.benchmark_id}};
  out["skipped"] = result.skip_reason.has_value();
  if (result.skip_reason) out["skip_reason"] = *result.skip_reason;
  json metrics = json::array();
  for (std::size_t k = 0; k < result.matrix.metric_names.size(); ++k) {
    metrics.push_back(
        {{"name", result.matrix.metric_names[k]},
         {"direction", result.matrix.directions[k] == MetricDirection::kInverted
                           ? "inverted"
                           : "as-is"}});
  }
  out["retained_metrics"] = metrics;
  json dropped = json::array();
  for (const auto& [name, reason] : result.dropped_metrics) {
    dropped.push_back({{"name", name}, {"reason", reason}});
  }
  out["dropped_metrics"] = dropped;
  json scores = json::array();
  for (const auto& s : result.scores) {
    scores.push_back({{"entry_id", s.entry_id}, {"rank", s.source_rank}, {"score", s.score}});
  }
  out["scores"] = scores;
  if (prune != nullptr) {
    json removed = json::array();
    for (const auto& r : prune->removals) {
      removed.push_back({{"entry_id", r.entry_id},
                         {"iteration", r.iteration},
                         {"discordant_pairs", r.discordant_pairs}});
    }
    out["removed_entries"] = removed;
    out["initial_discordance"] = prune->initial_fraction;
    out["final_discordance"] = prune->final_fraction;
  }
  return out;
}

}  // namespace ideaforecast
