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

#include "ideaforecast/calibration.h"

#include <algorithm>
#include <cmath>
#include <map>

namespace ideaforecast {
namespace {

bool InUnitInterval(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

double DebiasProbability(double p_orig, double p_swap) {
  return std::clamp((p_orig + (1.0 - p_swap)) / 2.0, 0.0, 1.0);
}

int BinIndex(double confidence, int bin_count) {
  const int index = static_cast<int>(std::floor(confidence * bin_count));
  return std::clamp(index, 0, bin_count - 1);
}

CalibrationReport CalibrationFromProbabilities(std::span<const ScoredProbability> items,
                                               int bin_count) {
  if (bin_count < 1) throw DomainError("bin count must be positive");
  if (items.empty()) throw DataError("no scorable predictions for calibration");
  CalibrationReport report;
  report.scored = static_cast<int>(items.size());
  std::vector<double> confidence_sum(bin_count, 0.0);
  std::vector<int> correct(bin_count, 0);
  report.bins.resize(bin_count);
  double brier_sum = 0.0;
  for (const ScoredProbability& item : items) {
    const double y = ToInt(item.label);
    brier_sum += (item.p_class1 - y) * (item.p_class1 - y);
    const Label predicted = item.p_class1 >= 0.5 ? Label::kIdeaA : Label::kIdeaB;
    const double confidence = std::max(item.p_class1, 1.0 - item.p_class1);
    const int b = BinIndex(confidence, bin_count);
    ++report.bins[b].count;
    confidence_sum[b] += confidence;
    correct[b] += predicted == item.label ? 1 : 0;
  }
  report.brier = brier_sum / static_cast<double>(items.size());
  for (int b = 0; b < bin_count; ++b) {
    CalibrationBin& bin = report.bins[b];
    bin.lower = static_cast<double>(b) / bin_count;
    bin.upper = static_cast<double>(b + 1) / bin_count;
    if (bin.count == 0) continue;
    bin.mean_confidence = confidence_sum[b] / bin.count;
    bin.accuracy = static_cast<double>(correct[b]) / bin.count;
    const double gap = std::abs(bin.accuracy - bin.mean_confidence);
    report.ece += static_cast<double>(bin.count) / report.scored * gap;
    report.mce = std::max(report.mce, gap);
  }
  // A weighted mean cannot exceed its maximum; this only absorbs rounding.
  report.ece = std::min(report.ece, report.mce);
  return report;
}

CalibrationReport BuildCalibrationReport(std::span<const Prediction> predictions,
                                         std::span<const IdeaPair> pairs, int bin_count,
                                         bool debiased) {
  std::map<std::string, const Prediction*> by_pair;
  for (const auto& p : predictions) by_pair[p.pair_id] = &p;
  std::vector<ScoredProbability> items;
  int skipped = 0;
  int rejected = 0;

  // A probability that is present but outside [0, 1] is rejected per record.
  auto usable = [&](const Prediction* p) -> bool {
    if (p == nullptr || !p->class_probability) {
      ++skipped;
      return false;
    }
    if (!InUnitInterval(*p->class_probability)) {
      ++rejected;
      return false;
    }
    return true;
  };

  if (!debiased) {
    for (const IdeaPair& pair : pairs) {
      const auto it = by_pair.find(pair.pair_id);
      const Prediction* p = it == by_pair.end() ? nullptr : it->second;
      if (usable(p)) items.push_back({*p->class_probability, pair.label});
    }
  } else {
    const auto index = IndexPairs(pairs);
    for (const IdeaPair& pair : pairs) {
      const IdeaPair& twin = pairs[index.at(pair.partner_id)];
      const bool is_original =
          pair.is_swap != twin.is_swap ? !pair.is_swap : pair.pair_id < twin.pair_id;
      if (!is_original) continue;
      const auto find = [&](const std::string& id) -> const Prediction* {
        const auto it = by_pair.find(id);
        return it == by_pair.end() ? nullptr : it->second;
      };
      const Prediction* orig = find(pair.pair_id);
      const Prediction* swap = find(twin.pair_id);
      const bool have_orig = orig != nullptr && orig->class_probability.has_value();
      const bool have_swap = swap != nullptr && swap->class_probability.has_value();
      if (!have_orig || !have_swap) {
        ++skipped;
        continue;
      }
      if (!InUnitInterval(*orig->class_probability) ||
          !InUnitInterval(*swap->class_probability)) {
        ++rejected;
        continue;
      }
      items.push_back(
          {DebiasProbability(*orig->class_probability, *swap->class_probability), pair.label});
    }
  }
  if (items.empty()) {
    throw DataError("no predictions with usable probabilities (" + std::to_string(skipped) +
                    " without, " + std::to_string(rejected) + " out of range)");
  }
  CalibrationReport report = CalibrationFromProbabilities(items, bin_count);
  report.debiased = debiased;
  report.skipped_count = skipped;
  report.rejected_count = rejected;
  return report;
}

nlohmann::ordered_json ToJson(const CalibrationReport& report) {
  nlohmann::ordered_json bins = nlohmann::ordered_json::array();
  for (const auto& bin : report.bins) {
    bins.push_back({{"lower", bin.lower},
                    {"upper", bin.upper},
                    {"count", bin.count},
                    {"mean_confidence", bin.mean_confidence},
                    {"accuracy", bin.accuracy}});
  }
  return {{"debiased", report.debiased},
          {"brier", report.brier},
          {"ece", report.ece},
          {"mce", report.mce},
          {"scored", report.scored},
          {"skipped_count", report.skipped_count},
          {"rejected_count", report.rejected_count},
          {"bins", bins}};
}

}  // namespace ideaforecast
