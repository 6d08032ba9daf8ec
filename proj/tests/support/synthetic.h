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

// Seeded synthetic corpora, pair sets and predictions shared by the unit and
// acceptance tests.

#ifndef IDEAFORECAST_TESTS_SUPPORT_SYNTHETIC_H_
#define IDEAFORECAST_TESTS_SUPPORT_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ideaforecast/dataset.h"
#include "ideaforecast/ingest.h"
#include "ideaforecast/predictor.h"
#include "ideaforecast/random.h"
#include "ideaforecast/scoring.h"

namespace ideaforecast::testing {

struct CorpusShape {
  int leaderboards = 10;
  int min_entries = 2;
  int max_entries = 20;
  int metrics = 2;
  // Probability that an entry reuses an idea from an earlier leaderboard.
  double shared_idea_rate = 0.1;
  // Probability that a metric value is missing.
  double missing_metric_rate = 0.0;
  // Noise added to the rank-driven metric signal, in metric units.
  double noise = 5.0;
  int first_year = 2015;
  int year_span = 6;
};

Corpus RandomCorpus(std::uint64_t seed, const CorpusShape& shape = {});

// Random entries with a rank and score; scores are not tied to ranks.
std::vector<UnifiedScore> RandomScores(Rng& rng, int n);

// Scores, prunes and pools every scorable leaderboard with a research goal.
std::vector<ScoredLeaderboard> ScoreCorpus(const Corpus& corpus);

// Full pair set (both split sides) for the given corpus and seed.
std::vector<IdeaPair> BuildPairs(const Corpus& corpus, std::uint64_t seed,
                                 SplitResult* split = nullptr);

// `units` originals with random labels followed by their swapped twins.
std::vector<IdeaPair> SyntheticUnits(int units, std::uint64_t seed);

Prediction MakePrediction(const std::string& pair_id, const std::string& raw_text,
                          std::optional<double> probability = std::nullopt);
Prediction AnswerPrediction(const std::string& pair_id, std::optional<Label> answer);
// Every pair answered with its label.
std::vector<Prediction> OraclePredictions(const std::vector<IdeaPair>& pairs);

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string ReadText(const std::filesystem::path& path);
void WriteText(const std::filesystem::path& path, const std::string& text);

// Repository fixture directory, set at configure time.
std::filesystem::path FixtureDir();

}  // namespace ideaforecast::testing

#endif  // IDEAFORECAST_TESTS_SUPPORT_SYNTHETIC_H_
