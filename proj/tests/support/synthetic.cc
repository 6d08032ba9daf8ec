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

#include "support/synthetic.h"

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <set>
#include <sstream>

namespace ideaforecast::testing {
namespace {

std::string Padded(int value, int width) {
  std::string text = std::to_string(value);
  return std::string(width > static_cast<int>(text.size()) ? width - text.size() : 0, '0') +
         text;
}

}  // namespace

Corpus RandomCorpus(std::uint64_t seed, const CorpusShape& shape) {
  Rng rng(seed);
  Corpus corpus;
  std::vector<std::string> idea_ids;
  int idea_counter = 0;
  for (int b = 0; b < shape.leaderboards; ++b) {
    Leaderboard board;
    board.benchmark_id = "bm-" + Padded(b, 4);
    board.task_name = "task " + std::to_string(b);
    board.dataset_name = "dataset " + std::to_string(b);
    board.research_goal = "Improve benchmark " + std::to_string(b) + ".";
    const int n = shape.min_entries +
                  static_cast<int>(rng.UniformIndex(shape.max_entries - shape.min_entries + 1));
    std::set<std::string> used;
    for (int r = 1; r <= n; ++r) {
      LeaderboardEntry entry;
      entry.entry_id = board.benchmark_id + "-e" + Padded(r, 3);
      entry.rank = r;
      std::string idea_id;
      if (!idea_ids.empty() && rng.UniformDouble() < shape.shared_idea_rate) {
        idea_id = idea_ids[rng.UniformIndex(idea_ids.size())];
      }
      if (idea_id.empty() || used.count(idea_id)) {
        Idea idea;
        idea.idea_id = "idea-" + Padded(idea_counter++, 5);
        idea.description = "Idea " + idea.idea_id + std::string(rng.UniformIndex(400) + 20, 'x');
        idea.char_length = Utf8Length(idea.description);
        idea.source_paper_id = "paper-" + idea.idea_id;
        idea.year = shape.first_year + static_cast<int>(rng.UniformIndex(shape.year_span));
        idea_id = idea.idea_id;
        idea_ids.push_back(idea_id);
        corpus.ideas.emplace(idea_id, std::move(idea));
      }
      used.insert(idea_id);
      entry.idea_id = idea_id;
      entry.paper_year = corpus.ideas.at(idea_id).year;
      entry.rr_paper_id = "rr-" + entry.entry_id;
      const double signal = 100.0 - 3.0 * r;
      for (int m = 0; m < shape.metrics; ++m) {
        if (rng.UniformDouble() < shape.missing_metric_rate) continue;
        const double noisy = signal + shape.noise * (rng.UniformDouble() - 0.5);
        // Odd metrics are lower-is-better.
        entry.metrics["m" + std::to_string(m)] = m % 2 == 0 ? noisy : 200.0 - noisy;
      }
      if (entry.metrics.empty()) entry.metrics["m0"] = signal;
      board.entries.push_back(std::move(entry));
    }
    corpus.leaderboards.push_back(std::move(board));
  }
  return corpus;
}

std::vector<UnifiedScore> RandomScores(Rng& rng, int n) {
  std::vector<UnifiedScore> entries;
  for (int i = 0; i < n; ++i) {
    UnifiedScore e;
    e.entry_id = "e" + Padded(i, 4);
    // Some duplicate ranks and scores on purpose.
    e.source_rank = 1 + static_cast<int>(rng.UniformIndex(n));
    e.score = static_cast<double>(rng.UniformIndex(20)) / 19.0;
    entries.push_back(e);
  }
  return entries;
}

std::vector<ScoredLeaderboard> ScoreCorpus(const Corpus& corpus) {
  std::vector<ScoredLeaderboard> out;
  for (const Leaderboard& board : corpus.leaderboards) {
    if (board.entries.size() < 2 || !board.HasResearchGoal()) continue;
    const ScoringResult scoring = ComputeUnifiedScores(board);
    if (scoring.skip_reason) continue;
    const PruneResult prune = PruneDiscordant(scoring.scores);
    out.push_back(BuildScoredLeaderboard(board, prune.kept, corpus));
  }
  return out;
}

std::vector<IdeaPair> BuildPairs(const Corpus& corpus, std::uint64_t seed, SplitResult* split) {
  const auto boards = ScoreCorpus(corpus);
  SplitResult result = BucketAndSplit(boards, seed);
  std::vector<IdeaPair> pairs;
  for (const auto& board : boards) {
    for (const SplitSide side : {SplitSide::kTrain, SplitSide::kTest}) {
      auto generated = GeneratePairs(board, result.assignment, side);
      pairs.insert(pairs.end(), generated.pairs.begin(), generated.pairs.end());
    }
  }
  if (split != nullptr) *split = std::move(result);
  return pairs;
}

std::vector<IdeaPair> SyntheticUnits(int units, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<IdeaPair> originals;
  for (int i = 0; i < units; ++i) {
    IdeaPair pair;
    const std::string a = "a" + Padded(i, 5);
    const std::string b = "b" + Padded(i, 5);
    pair.pair_id = "bm|" + a + "|" + b;
    pair.partner_id = "bm|" + b + "|" + a;
    pair.benchmark_id = "bm";
    pair.research_goal = "goal";
    pair.idea_a = "idea text " + a;
    pair.idea_b = "idea text " + b;
    pair.label = rng.UniformIndex(2) == 1 ? Label::kIdeaA : Label::kIdeaB;
    pair.sigma_tier = static_cast<SigmaTier>(1 + rng.UniformIndex(3));
    pair.delta = static_cast<double>(pair.sigma_tier);
    pair.meta.len_a = 100 + static_cast<std::int64_t>(rng.UniformIndex(50));
    pair.meta.len_b = 100 + static_cast<std::int64_t>(rng.UniformIndex(50));
    pair.meta.year_a = 2018 + static_cast<int>(rng.UniformIndex(4));
    pair.meta.year_b = 2018 + static_cast<int>(rng.UniformIndex(4));
    pair.meta.score_a = pair.label == Label::kIdeaA ? 0.8 : 0.2;
    pair.meta.score_b = 1.0 - pair.meta.score_a;
    originals.push_back(pair);
  }
  std::vector<IdeaPair> pairs = originals;
  for (const auto& p : originals) pairs.push_back(SwapPair(p));
  return pairs;
}

Prediction MakePrediction(const std::string& pair_id, const std::string& raw_text,
                          std::optional<double> probability) {
  Prediction p;
  p.pair_id = pair_id;
  p.parsed = ParseResponse(raw_text);
  p.class_probability = probability;
  p.backend_id = "test";
  return p;
}

Prediction AnswerPrediction(const std::string& pair_id, std::optional<Label> answer) {
  return MakePrediction(pair_id,
                        answer ? "Answer: " + std::to_string(ToInt(*answer)) : "no answer");
}

std::vector<Prediction> OraclePredictions(const std::vector<IdeaPair>& pairs) {
  std::vector<Prediction> out;
  for (const auto& p : pairs) out.push_back(AnswerPrediction(p.pair_id, p.label));
  return out;
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  const auto base = std::filesystem::temp_directory_path();
  for (;;) {
    path_ = base / ("ideaforecast-test-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter++));
    if (std::filesystem::create_directories(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ignored;
  std::filesystem::remove_all(path_, ignored);
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

std::filesystem::path FixtureDir() { return IDEAFORECAST_FIXTURE_DIR; }

}  // namespace ideaforecast::testing
