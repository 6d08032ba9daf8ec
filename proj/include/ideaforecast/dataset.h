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

// Pairwise dataset construction: idea pools, time-bucketed train/test split
// and sigma-stratified, swap-augmented pair generation.

#ifndef IDEAFORECAST_DATASET_H_
#define IDEAFORECAST_DATASET_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ideaforecast/common.h"
#include "ideaforecast/ingest.h"
#include "ideaforecast/scoring.h"
#include "json.hpp"

namespace ideaforecast {

// ---------------------------------------------------------------------------
// Sigma tiers
// ---------------------------------------------------------------------------

enum class SigmaTier { kNone = 0, kOne = 1, kTwo = 2, kThree = 3 };

std::string TierName(SigmaTier tier);
std::optional<SigmaTier> ParseTierName(const std::string& name);

struct SigmaWindow {
  double low = 0.0;
  double high = 0.0;
};

// Inclusive windows for the 1-, 2- and 3-sigma tiers.
struct SigmaWindows {
  std::array<SigmaWindow, 3> windows = {
      SigmaWindow{0.8, 1.2}, SigmaWindow{1.8, 2.2}, SigmaWindow{2.8, 3.2}};

  // Throws DomainError unless every window is ordered and the windows are
  // disjoint and increasing.
  void Check() const;
};

// Slack applied to window bounds to absorb rounding in |s_i - s_j| / sigma.
inline constexpr double kWindowSlack = 1e-9;

// Throws DomainError for a negative or NaN delta.
SigmaTier SigmaTierOf(double delta, const SigmaWindows& windows = {});

// ---------------------------------------------------------------------------
// Idea pools
// ---------------------------------------------------------------------------

struct PoolIdea {
  std::string idea_id;
  std::string description;
  std::string source_paper_id;
  std::optional<int> year;
  std::int64_t char_length = 0;
  double score = 0.0;
  int rank = 1;
};

// One leaderboard after scoring and discordance removal.
struct ScoredLeaderboard {
  std::string benchmark_id;
  std::optional<std::string> research_goal;
  // Unique ideas, sorted by idea_id.
  std::vector<PoolIdea> pool;
  // Population standard deviation of unified scores over surviving entries.
  double sigma = 0.0;
  int surviving_entries = 0;

  bool HasResearchGoal() const {
    return research_goal.has_value() && !research_goal->empty();
  }
};

// Population standard deviation.
double PopulationStdDev(std::span<const double> values);

// Builds the idea pool from the entries kept by discordance removal. When an
// idea backs several entries, the best-ranked entry represents it. The idea's
// year falls back to the entry's paper year when the idea has none.
ScoredLeaderboard BuildScoredLeaderboard(const Leaderboard& leaderboard,
                                         std::span<const UnifiedScore> kept,
                                         const Corpus& corpus);

// ---------------------------------------------------------------------------
// Train/test split
// ---------------------------------------------------------------------------

enum class SplitSide { kTrain, kTest };

std::string SideName(SplitSide side);

struct SplitAssignment {
  std::map<std::string, SplitSide> side;
  // Leaderboard where each idea was first assigned.
  std::map<std::string, std::string> provenance;

  std::optional<SplitSide> Find(const std::string& idea_id) const;
};

struct BucketReport {
  // Years merged into this bucket, ascending; nullopt is the unknown year.
  std::vector<std::optional<int>> years;
  int idea_count = 0;
  int paper_count = 0;
  int test_ideas = 0;
  int test_papers = 0;
  // At least 5 unique papers and 2 test papers after assignment.
  bool valid = false;
};

struct LeaderboardSplitReport {
  std::string benchmark_id;
  int idea_count = 0;
  bool all_train = false;
  std::vector<BucketReport> buckets;
  // Ideas whose side was fixed by an earlier leaderboard.
  int preassigned = 0;
};

struct SplitResult {
  SplitAssignment assignment;
  std::vector<LeaderboardSplitReport> reports;
};

inline constexpr int kMinBucketPapers = 5;
inline constexpr int kMinBucketTestPapers = 2;
inline constexpr int kMinSplitIdeas = 4;

// Test-side size for a bucket of `n` ideas: max(1, round(n / 5)) for n >= 4,
// otherwise 0.
int TestQuota(int n);

// Leaderboards are processed in benchmark_id order; an idea keeps the side it
// received first.
SplitResult BucketAndSplit(std::span<const ScoredLeaderboard> leaderboards,
                           std::uint64_t seed);

// ---------------------------------------------------------------------------
// Pairs
// ---------------------------------------------------------------------------

struct PairMeta {
  std::optional<int> year_a;
  std::optional<int> year_b;
  std::int64_t len_a = 0;
  std::int64_t len_b = 0;
  double score_a = 0.0;
  double score_b = 0.0;
};

struct IdeaPair {
  std::string pair_id;
  std::string partner_id;
  std::string benchmark_id;
  std::string research_goal;
  std::string idea_a;
  std::string idea_b;
  Label label = Label::kIdeaA;
  SigmaTier sigma_tier = SigmaTier::kNone;
  double delta = 0.0;
  bool is_swap = false;
  PairMeta meta;
  // Identifiers are carried on ranking pair files only.
  std::optional<std::string> idea_a_id;
  std::optional<std::string> idea_b_id;
  // Optional externally supplied reasoning trace, passed through unchanged.
  std::optional<std::string> reasoning;
};

// Returns the twin with positions exchanged and the label complemented.
IdeaPair SwapPair(const IdeaPair& pair);

struct PairGenerationOptions {
  SigmaWindows windows;
  // When false every pair is emitted with tier kNone (ranking comparisons).
  bool require_window = true;
};

struct PairGenerationResult {
  std::vector<IdeaPair> pairs;
  std::optional<std::string> skip_reason;
};

// Emits every unordered pair of ideas on `side`, winner first with label 1,
// followed by its swapped twin with label 0.
PairGenerationResult GeneratePairs(const ScoredLeaderboard& leaderboard,
                                   const SplitAssignment& assignment,
                                   SplitSide side,
                                   const PairGenerationOptions& options = {});

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

nlohmann::ordered_json ToJson(const IdeaPair& pair);
// Throws DataError on schema violations.
IdeaPair PairFromJson(const nlohmann::json& record);

void WritePairs(std::span<const IdeaPair> pairs, std::ostream& out);
// Throws DataError naming the offending line.
std::vector<IdeaPair> ReadPairs(const std::filesystem::path& path);
std::vector<IdeaPair> ReadPairs(std::istream& in);

// pair_id -> index into `pairs`; throws DataError on duplicate ids or when a
// partner_id does not resolve.
std::map<std::string, std::size_t> IndexPairs(std::span<const IdeaPair> pairs);

nlohmann::json ToJson(const SplitResult& split);
void WriteManifest(const SplitAssignment& assignment, std::ostream& out);

}  // namespace ideaforecast

#endif  // IDEAFORECAST_DATASET_H_
