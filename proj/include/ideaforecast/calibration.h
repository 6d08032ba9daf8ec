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

// Brier score, expected and maximum calibration error.
//
// Each scored item carries p = P(answer = 1) and the label. The predicted
// class is 1 when p >= 0.5; confidence is max(p, 1 - p). Bins are
// [0, 0.1), [0.1, 0.2), ..., [0.9, 1.0] for the default 10 bins.

#ifndef IDEAFORECAST_CALIBRATION_H_
#define IDEAFORECAST_CALIBRATION_H_

#include <span>
#include <vector>

#include "ideaforecast/dataset.h"
#include "ideaforecast/predictor.h"
#include "json.hpp"

namespace ideaforecast {

// Merges the two presentation frames of a unit into the original frame:
// (p_orig + (1 - p_swap)) / 2.
double DebiasProbability(double p_orig, double p_swap);

struct CalibrationBin {
  double lower = 0.0;
  double upper = 0.0;
  int count = 0;
  double mean_confidence = 0.0;
  double accuracy = 0.0;
};

struct CalibrationReport {
  double brier = 0.0;
  double ece = 0.0;
  double mce = 0.0;
  std::vector<CalibrationBin> bins;
  bool debiased = false;
  int scored = 0;
  // Predictions (or units, when debiased) without a probability.
  int skipped_count = 0;
  // Probabilities outside [0, 1].
  int rejected_count = 0;
};

struct ScoredProbability {
  double p_class1 = 0.5;
  Label label = Label::kIdeaA;
};

// Index of the confidence bin; every confidence in [0, 1] maps to one bin.
int BinIndex(double confidence, int bin_count);

// Throws DataError when `items` is empty and DomainError for bin_count < 1.
CalibrationReport CalibrationFromProbabilities(std::span<const ScoredProbability> items,
                                               int bin_count = 10);

// Scores predictions against their pairs' labels. In debiased mode the twins
// of each unit are merged first and the unit is scored once in the frame of
// its non-swapped pair. Throws DataError when nothing is scorable.
CalibrationReport BuildCalibrationReport(std::span<const Prediction> predictions,
                                         std::span<const IdeaPair> pairs, int bin_count,
                                         bool debiased);

nlohmann::ordered_json ToJson(const CalibrationReport& report);

}  // namespace ideaforecast

#endif  // IDEAFORECAST_CALIBRATION_H_
