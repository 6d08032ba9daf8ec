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

#include "ideaforecast/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

#include "ideaforecast/random.h"

namespace ideaforecast {
namespace {

using nlohmann::ordered_json;

double Percent(int part, int whole) {
  return whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole);
}

std::string JoinIds(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += " " + id;
  return out;
}

std::map<std::string, const PairVerdict*> IndexVerdicts(std::span<const PairVerdict> verdicts) {
  std::map<std::string, const PairVerdict*> index;
  for (const auto& v : verdicts) index[v.pair_id] = &v;
  return index;
}

std::vector<char> Outcomes(const std::map<std::string, const PairVerdict*>& index,
                           std::span<const std::string> ids) {
  std::vector<char> outcomes;
  std::vector<std::string> missing;
  for (const auto& id : ids) {
    const auto it = index.find(id);
    if (it == index.end()) {
      missing.push_back(id);
    } else {
      outcomes.push_back(it->second->correct_consistent ? 1 : 0);
    }
  }
  if (!missing.empty()) throw DataError("no verdict for:" + JoinIds(missing));
  return outcomes;
}

std::optional<double> SubsetAccuracy(const std::map<std::string, const PairVerdict*>& index,
                                     const std::vector<std::string>& ids) {
  if (ids.empty()) return std::nullopt;
  int correct = 0;
  for (const auto& id : ids) correct += index.at(id)->correct_consistent ? 1 : 0;
  return Percent(correct, static_cast<int>(ids.size()));
}

// Runs `resamples` draws, each from its own seed-derived substream, so the
// result does not depend on how draws are scheduled across threads.
template <typename Draw>
BootstrapResult RunBootstrap(double observed, int resamples, std::uint64_t seed, Draw draw) {
  if (resamples < 1) throw DomainError("bootstrap needs at least one resample");
  std::vector<double> deltas(static_cast<std::size_t>(resamples));
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min<std::size_t>(hw, deltas.size());
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t b = begin; b < end; ++b) {
      Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(b)));
      deltas[b] = draw(rng);
    }
  };
  if (workers <= 1) {
    run(0, deltas.size());
  } else {
    std::vector<std::thread> threads;
    const std::size_t chunk = (deltas.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(deltas.size(), begin + chunk);
      if (begin < end) threads.emplace_back(run, begin, end);
    }
    for (auto& t : threads) t.join();
  }

  BootstrapResult result;
  result.delta_pp = observed;
  result.resamples = resamples;
  result.seed = seed;
  result.mean_resampled_pp =
      std::accumulate(deltas.begin(), deltas.end(), 0.0) / static_cast<double>(deltas.size());
  // Resamples on the far side of zero, with exact zeros counted as half so a
  // degenerate (all-zero) distribution reports p = 1.
  const bool positive = result.mean_resampled_pp >= 0.0;
  double far_side = 0.0;
  for (const double d : deltas) {
    if (d == 0.0) {
      far_side += 0.5;
    } else if (positive ? d < 0.0 : d > 0.0) {
      far_side += 1.0;
    }
  }
  result.p_value =
      std::min(1.0, 2.0 * (far_side + 1.0) / static_cast<double>(resamples + 1));
  std::sort(deltas.begin(), deltas.end());
  result.ci_low = Percentile(deltas, 2.5);
  result.ci_high = Percentile(deltas, 97.5);
  return result;
}

double ResampledAccuracy(const std::vector<char>& outcomes, Rng& rng) {
  int correct = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    correct += outcomes[rng.UniformIndex(outcomes.size())];
  }
  return Percent(correct, static_cast<int>(outcomes.size()));
}

double MeanPercent(const std::vector<char>& outcomes) {
  const int correct = std::accumulate(outcomes.begin(), outcomes.end(), 0);
  return Percent(correct, static_cast<int>(outcomes.size()));
}

}  // namespace

std::vector<PairVerdict> JudgePairs(std::span<const Prediction> predictions,
                                    std::span<const IdeaPair> pairs) {
  const auto index = IndexPairs(pairs);
  std::map<std::string, const Prediction*> by_pair;
  for (const auto& p : predictions) by_pair[p.pair_id] = &p;
  std::vector<std::string> missing;
  for (const auto& pair : pairs) {
    if (!by_pair.count(pair.pair_id)) missing.push_back(pair.pair_id);
  }
  if (!missing.empty()) {
    throw DataError("pairs without a prediction:" + JoinIds(missing));
  }

  std::vector<PairVerdict> verdicts;
  for (const auto& pair : pairs) {
    const IdeaPair& twin = pairs[index.at(pair.partner_id)];
    // Each unit is visited once, from its non-swapped side (or the smaller id
    // when the flags do not tell the twins apart).
    const bool is_original =
        pair.is_swap != twin.is_swap ? !pair.is_swap : pair.pair_id < twin.pair_id;
    if (!is_original) continue;
    const auto& first = by_pair.at(pair.pair_id)->parsed.answer;
    const auto& second = by_pair.at(twin.pair_id)->parsed.answer;
    PairVerdict verdict;
    verdict.pair_id = pair.pair_id;
    verdict.partner_id = twin.pair_id;
    verdict.answered_both = first.has_value() && second.has_value();
    // The twins present the ideas in opposite positions, so the same idea is
    // named exactly when the numerals differ.
    verdict.consistent = verdict.answered_both && *first != *second;
    verdict.correct_consistent = verdict.consistent && *first == pair.label;
    verdicts.push_back(std::move(verdict));
  }
  std::sort(verdicts.begin(), verdicts.end(),
            [](const PairVerdict& a, const PairVerdict& b) { return a.pair_id < b.pair_id; });
  return verdicts;
}

EvalReport Evaluate(std::span<const PairVerdict> verdicts, std::span<const IdeaPair> pairs) {
  if (verdicts.empty()) throw DataError("cannot evaluate an empty verdict set");
  std::map<std::string, const IdeaPair*> by_id;
  for (const auto& pair : pairs) by_id[pair.pair_id] = &pair;
  EvalReport report;
  for (const auto& v : verdicts) {
    const auto it = by_id.find(v.pair_id);
    if (it == by_id.end()) throw DataError("verdict for unknown pair " + v.pair_id);
    TierStats& tier = report.per_tier[it->second->sigma_tier];
    ++report.units;
    ++tier.units;
    if (v.consistent) {
      ++report.consistent;
      ++tier.consistent;
    }
    if (v.correct_consistent) {
      ++report.correct;
      ++tier.correct;
    }
  }
  report.overall_accuracy = Percent(report.correct, report.units);
  report.consistency_rate = Percent(report.consistent, report.units);
  if (report.consistent > 0) {
    report.conditional_accuracy = Percent(report.correct, report.consistent);
  }
  for (auto& [tier, stats] : report.per_tier) {
    stats.accuracy = Percent(stats.correct, stats.units);
  }
  return report;
}

std::string DimensionName(SubsetDimension dimension) {
  switch (dimension) {
    case SubsetDimension::kLength:
      return "length";
    case SubsetDimension::kRecency:
      return "recency";
    case SubsetDimension::kParaphrase:
      return "paraphrase";
  }
  return "unknown";
}

SubsetDelta SubsetDeltas(std::span<const PairVerdict> verdicts,
                         std::span<const IdeaPair> pairs, SubsetDimension dimension) {
  if (dimension == SubsetDimension::kParaphrase) {
    throw DomainError("paraphrase deltas need a second verdict set; use ParaphraseDelta");
  }
  std::map<std::string, const IdeaPair*> by_id;
  for (const auto& pair : pairs) by_id[pair.pair_id] = &pair;

  SubsetDelta delta;
  delta.dimension = dimension;
  if (dimension == SubsetDimension::kLength) {
    delta.name_a = "longer-wins";
    delta.name_b = "shorter-wins";
  } else {
    delta.name_a = "newer-wins";
    delta.name_b = "older-wins";
  }
  for (const auto& v : verdicts) {
    const auto it = by_id.find(v.pair_id);
    if (it == by_id.end()) throw DataError("verdict for unknown pair " + v.pair_id);
    const IdeaPair& pair = *it->second;
    const bool a_wins = pair.label == Label::kIdeaA;
    if (dimension == SubsetDimension::kLength) {
      const auto winner = a_wins ? pair.meta.len_a : pair.meta.len_b;
      const auto loser = a_wins ? pair.meta.len_b : pair.meta.len_a;
      if (winner > loser) {
        delta.ids_a.push_back(v.pair_id);
      } else if (winner < loser) {
        delta.ids_b.push_back(v.pair_id);
      } else {
        ++delta.excluded;
      }
    } else {
      const auto& winner = a_wins ? pair.meta.year_a : pair.meta.year_b;
      const auto& loser = a_wins ? pair.meta.year_b : pair.meta.year_a;
      if (!winner || !loser) {
        ++delta.excluded;
      } else if (*winner > *loser) {
        delta.ids_a.push_back(v.pair_id);
      } else if (*winner < *loser) {
        delta.ids_b.push_back(v.pair_id);
      } else {
        delta.ids_same.push_back(v.pair_id);
      }
    }
  }
  const auto index = IndexVerdicts(verdicts);
  delta.accuracy_a = SubsetAccuracy(index, delta.ids_a);
  delta.accuracy_b = SubsetAccuracy(index, delta.ids_b);
  delta.accuracy_same = SubsetAccuracy(index, delta.ids_same);
  if (delta.accuracy_a && delta.accuracy_b) {
    delta.delta_pp = *delta.accuracy_a - *delta.accuracy_b;
  }
  return delta;
}

SubsetDelta ParaphraseDelta(std::span<const PairVerdict> original,
                            std::span<const PairVerdict> paraphrased) {
  SubsetDelta delta;
  delta.dimension = SubsetDimension::kParaphrase;
  delta.name_a = "paraphrased";
  delta.name_b = "original";
  const auto original_index = IndexVerdicts(original);
  const auto paraphrased_index = IndexVerdicts(paraphrased);
  for (const auto& [id, verdict] : paraphrased_index) {
    if (original_index.count(id)) {
      delta.ids_a.push_back(id);
    } else {
      ++delta.excluded;
    }
  }
  delta.ids_b = delta.ids_a;
  delta.accuracy_a = SubsetAccuracy(paraphrased_index, delta.ids_a);
  delta.accuracy_b = SubsetAccuracy(original_index, delta.ids_b);
  if (delta.accuracy_a && delta.accuracy_b) {
    delta.delta_pp = *delta.accuracy_a - *delta.accuracy_b;
  }
  return delta;
}

BootstrapResult BootstrapTest(std::span<const PairVerdict> verdicts,
                              std::span<const std::string> ids_a,
                              std::span<const std::string> ids_b, int resamples,
                              std::uint64_t seed) {
  if (ids_a.empty() || ids_b.empty()) {
    throw DataError("bootstrap needs two nonempty subsets");
  }
  const std::set<std::string> set_a(ids_a.begin(), ids_a.end());
  for (const auto& id : ids_b) {
    if (set_a.count(id)) throw DataError("bootstrap subsets overlap at " + id);
  }
  const auto index = IndexVerdicts(verdicts);
  const std::vector<char> a = Outcomes(index, ids_a);
  const std::vector<char> b = Outcomes(index, ids_b);
  return RunBootstrap(MeanPercent(a) - MeanPercent(b), resamples, seed, [&](Rng& rng) {
    const double acc_a = ResampledAccuracy(a, rng);
    return acc_a - ResampledAccuracy(b, rng);
  });
}

BootstrapResult PairedBootstrapTest(std::span<const PairVerdict> verdicts_a,
                                    std::span<const PairVerdict> verdicts_b,
                                    std::span<const std::string> ids, int resamples,
                                    std::uint64_t seed) {
  if (ids.empty()) throw DataError("bootstrap needs a nonempty subset");
  const std::vector<char> a = Outcomes(IndexVerdicts(verdicts_a), ids);
  const std::vector<char> b = Outcomes(IndexVerdicts(verdicts_b), ids);
  return RunBootstrap(MeanPercent(a) - MeanPercent(b), resamples, seed, [&](Rng& rng) {
    int diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::size_t k = rng.UniformIndex(a.size());
      diff += a[k] - b[k];
    }
    return 100.0 * static_cast<double>(diff) / static_cast<double>(a.size());
  });
}

std::string SignificanceMarker(double p_value) {
  if (p_value < 0.01) return "**";
  if (p_value < 0.05) return "*";
  return "";
}

double Percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DomainError("percentile of an empty sample");
  const double rank = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(sorted.size() - 1, lo + 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

nlohmann::ordered_json ToJson(const EvalReport& report) {
  ordered_json tiers = ordered_json::object();
  for (const auto& [tier, stats] : report.per_tier) {
    tiers[TierName(tier)] = {{"units", stats.units},
                             {"consistent", stats.consistent},
                             {"correct", stats.correct},
                             {"accuracy", stats.accuracy}};
  }
  return {{"overall_accuracy", report.overall_accuracy},
          {"consistency_rate", report.consistency_rate},
          {"conditional_accuracy", report.conditional_accuracy
                                       ? ordered_json(*report.conditional_accuracy)
                                       : ordered_json(nullptr)},
          {"units", report.units},
          {"consistent", report.consistent},
          {"correct", report.correct},
          {"per_tier", tiers}};
}

nlohmann::ordered_json ToJson(const BootstrapResult& result) {
  return {{"delta_pp", result.delta_pp},
          {"mean_resampled_pp", result.mean_resampled_pp},
          {"ci_low", result.ci_low},
          {"ci_high", result.ci_high},
          {"p_value", result.p_value},
          {"significance", SignificanceMarker(result.p_value)},
          {"resamples", result.resamples},
          {"seed", result.seed}};
}

nlohmann::ordered_json ToJson(const SubsetDelta& delta) {
  auto optional = [](const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json out = {
      {"dimension", DimensionName(delta.dimension)},
      {"subset_a", {{"name", delta.name_a},
                    {"count", delta.ids_a.size()},
                    {"accuracy", optional(delta.accuracy_a)}}},
      {"subset_b", {{"name", delta.name_b},
                    {"count", delta.ids_b.size()},
                    {"accuracy", optional(delta.accuracy_b)}}},
      {"delta_pp", optional(delta.delta_pp)},
      {"excluded", delta.excluded}};
  if (delta.dimension == SubsetDimension::kRecency) {
    out["same_year"] = {{"count", delta.ids_same.size()},
                        {"accuracy", optional(delta.accuracy_same)}};
  }
  out["bootstrap"] = delta.bootstrap ? ToJson(*delta.bootstrap) : ordered_json(nullptr);
  return out;
}

nlohmann::ordered_json ToJson(const PairVerdict& verdict) {
  return {{"pair_id", verdict.pair_id},
          {"partner_id", verdict.partner_id},
          {"consistent", verdict.consistent},
          {"correct_consistent", verdict.correct_consistent},
          {"answered_both", verdict.answered_both}};
}

}  // namespace ideaforecast
