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

#include "ideaforecast/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include "ideaforecast/random.h"

namespace ideaforecast {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Bucket under construction: years and the pool indices of its ideas.
struct Bucket {
  std::vector<std::optional<int>> years;
  std::vector<std::size_t> members;
};

// nullopt (unknown year) sorts after every known year.
bool YearLess(const std::optional<int>& a, const std::optional<int>& b) {
  if (a.has_value() != b.has_value()) return a.has_value();
  return a.has_value() && *a < *b;
}

int UniquePapers(const std::vector<std::size_t>& members,
                 std::span<const PoolIdea> pool) {
  std::set<std::string> papers;
  for (const std::size_t i : members) papers.insert(pool[i].source_paper_id);
  return static_cast<int>(papers.size());
}

std::vector<Bucket> MakeBuckets(std::span<const PoolIdea> pool) {
  std::vector<Bucket> buckets;
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return YearLess(pool[a].year, pool[b].year);
  });
  for (const std::size_t i : order) {
    if (buckets.empty() || buckets.back().years.front() != pool[i].year) {
      buckets.push_back({{pool[i].year}, {}});
    }
    buckets.back().members.push_back(i);
  }
  // Small buckets merge into the previous bucket, or the next one if first.
  for (;;) {
    if (buckets.size() <= 1) break;
    auto small = std::find_if(buckets.begin(), buckets.end(), [&](const Bucket& b) {
      return UniquePapers(b.members, pool) < kMinBucketPapers;
    });
    if (small == buckets.end()) break;
    auto target = small == buckets.begin() ? std::next(small) : std::prev(small);
    target->years.insert(target->years.end(), small->years.begin(), small->years.end());
    std::sort(target->years.begin(), target->years.end(), YearLess);
    target->members.insert(target->members.end(), small->members.begin(),
                           small->members.end());
    buckets.erase(small);
  }
  return buckets;
}

std::optional<int> OptionalInt(const json& record, const char* key) {
  const auto it = record.find(key);
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer() && !it->is_number_unsigned()) {
    throw DataError(std::string("field \"") + key + "\" must be an integer or null");
  }
  return it->get<int>();
}

template <typename T>
T Required(const json& record, const char* key) {
  const auto it = record.find(key);
  if (it == record.end()) throw DataError(std::string("missing field \"") + key + "\"");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("field \"") + key + "\" has the wrong type");
  }
}

}  // namespace

std::string TierName(SigmaTier tier) {
  switch (tier) {
    case SigmaTier::kOne:
      return "one";
    case SigmaTier::kTwo:
      return "two";
    case SigmaTier::kThree:
      return "three";
    case SigmaTier::kNone:
      break;
  }
  return "none";
}

std::optional<SigmaTier> ParseTierName(const std::string& name) {
  if (name == "one") return SigmaTier::kOne;
  if (name == "two") return SigmaTier::kTwo;
  if (name == "three") return SigmaTier::kThree;
  if (name == "none") return SigmaTier::kNone;
  return std::nullopt;
}

void SigmaWindows::Check() const {
  double previous_high = -1.0;
  for (const SigmaWindow& w : windows) {
    if (!(w.low >= 0.0) || !(w.high >= w.low)) {
      throw DomainError("sigma window bounds must satisfy 0 <= low <= high");
    }
    if (!(w.low > previous_high + 2 * kWindowSlack)) {
      throw DomainError("sigma windows must be disjoint and increasing");
    }
    previous_high = w.high;
  }
}

SigmaTier SigmaTierOf(double delta, const SigmaWindows& windows) {
  if (std::isnan(delta) || delta < 0.0) {
    throw DomainError("score gap must be nonnegative");
  }
  for (std::size_t t = 0; t < windows.windows.size(); ++t) {
    const SigmaWindow& w = windows.windows[t];
    if (delta >= w.low - kWindowSlack && delta <= w.high + kWindowSlack) {
      return static_cast<SigmaTier>(t + 1);
    }
  }
  return SigmaTier::kNone;
}

double PopulationStdDev(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double sum_sq = 0.0;
  for (const double v : values) sum_sq += (v - mean) * (v - mean);
  return std::sqrt(sum_sq / n);
}

ScoredLeaderboard BuildScoredLeaderboard(const Leaderboard& leaderboard,
                                         std::span<const UnifiedScore> kept,
                                         const Corpus& corpus) {
  ScoredLeaderboard out;
  out.benchmark_id = leaderboard.benchmark_id;
  out.research_goal = leaderboard.research_goal;
  out.surviving_entries = static_cast<int>(kept.size());

  std::map<std::string, const LeaderboardEntry*> entries;
  for (const auto& entry : leaderboard.entries) entries[entry.entry_id] = &entry;

  std::vector<double> scores;
  std::map<std::string, PoolIdea> pool;
  for (const UnifiedScore& s : kept) {
    scores.push_back(s.score);
    const auto found = entries.find(s.entry_id);
    if (found == entries.end()) {
      throw DataError("scored entry " + s.entry_id + " not in leaderboard " +
                      leaderboard.benchmark_id);
    }
    const LeaderboardEntry& entry = *found->second;
    const Idea* idea = corpus.FindIdea(entry.idea_id);
    if (idea == nullptr) throw DataError("unresolved idea " + entry.idea_id);
    PoolIdea candidate{idea->idea_id,     idea->description,
                       idea->source_paper_id,
                       idea->year ? idea->year : entry.paper_year,
                       idea->char_length, s.score,
                       s.source_rank};
    auto [it, inserted] = pool.emplace(idea->idea_id, candidate);
    if (!inserted && (candidate.rank < it->second.rank ||
                      (candidate.rank == it->second.rank &&
                       candidate.score > it->second.score))) {
      it->second = candidate;
    }
  }
  out.sigma = PopulationStdDev(scores);
  for (auto& [id, idea] : pool) out.pool.push_back(std::move(idea));
  return out;
}

std::string SideName(SplitSide side) {
  return side == SplitSide::kTest ? "test" : "train";
}

std::optional<SplitSide> SplitAssignment::Find(const std::string& idea_id) const {
  const auto it = side.find(idea_id);
  if (it == side.end()) return std::nullopt;
  return it->second;
}

int TestQuota(int n) {
  if (n < kMinSplitIdeas) return 0;
  return std::max(1, (2 * n + 5) / 10);
}

SplitResult BucketAndSplit(std::span<const ScoredLeaderboard> leaderboards,
                           std::uint64_t seed) {
  std::vector<const ScoredLeaderboard*> order;
  for (const auto& board : leaderboards) order.push_back(&board);
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    return a->benchmark_id < b->benchmark_id;
  });

  SplitResult result;
  SplitAssignment& assignment = result.assignment;
  auto assign = [&](const PoolIdea& idea, SplitSide side, const std::string& board) {
    assignment.side.emplace(idea.idea_id, side);
    assignment.provenance.emplace(idea.idea_id, board);
  };

  for (const ScoredLeaderboard* board : order) {
    const std::span<const PoolIdea> pool(board->pool);
    LeaderboardSplitReport report;
    report.benchmark_id = board->benchmark_id;
    report.idea_count = static_cast<int>(pool.size());
    for (const auto& idea : pool) {
      if (assignment.Find(idea.idea_id)) ++report.preassigned;
    }

    if (report.idea_count < kMinSplitIdeas) {
      report.all_train = true;
      for (const auto& idea : pool) {
        if (!assignment.Find(idea.idea_id)) {
          assign(idea, SplitSide::kTrain, board->benchmark_id);
        }
      }
      result.reports.push_back(std::move(report));
      continue;
    }

    const std::vector<Bucket> buckets = MakeBuckets(pool);
    for (std::size_t b = 0; b < buckets.size(); ++b) {
      const Bucket& bucket = buckets[b];
      const int quota = TestQuota(static_cast<int>(bucket.members.size()));
      int already_test = 0;
      std::vector<std::size_t> open;
      for (const std::size_t i : bucket.members) {
        const auto side = assignment.Find(pool[i].idea_id);
        if (!side) {
          open.push_back(i);
        } else if (*side == SplitSide::kTest) {
          ++already_test;
        }
      }
      std::sort(open.begin(), open.end(), [&](std::size_t x, std::size_t y) {
        return pool[x].idea_id < pool[y].idea_id;
      });
      Rng rng(DeriveSeed(seed, board->benchmark_id + "#" + std::to_string(b)));
      rng.Shuffle(open);
      const std::size_t take =
          std::min(open.size(), static_cast<std::size_t>(std::max(0, quota - already_test)));
      for (std::size_t k = 0; k < open.size(); ++k) {
        assign(pool[open[k]], k < take ? SplitSide::kTest : SplitSide::kTrain,
               board->benchmark_id);
      }

      BucketReport bucket_report;
      bucket_report.years = bucket.years;
      bucket_report.idea_count = static_cast<int>(bucket.members.size());
      bucket_report.paper_count = UniquePapers(bucket.members, pool);
      std::vector<std::size_t> test_members;
      for (const std::size_t i : bucket.members) {
        if (assignment.Find(pool[i].idea_id) == SplitSide::kTest) test_members.push_back(i);
      }
      bucket_report.test_ideas = static_cast<int>(test_members.size());
      bucket_report.test_papers = UniquePapers(test_members, pool);
      bucket_report.valid = bucket_report.paper_count >= kMinBucketPapers &&
                            bucket_report.test_papers >= kMinBucketTestPapers;
      report.buckets.push_back(std::move(bucket_report));
    }
    result.reports.push_back(std::move(report));
  }
  return result;
}

IdeaPair SwapPair(const IdeaPair& pair) {
  IdeaPair out = pair;
  out.pair_id = pair.partner_id;
  out.partner_id = pair.pair_id;
  std::swap(out.idea_a, out.idea_b);
  std::swap(out.idea_a_id, out.idea_b_id);
  std::swap(out.meta.year_a, out.meta.year_b);
  std::swap(out.meta.len_a, out.meta.len_b);
  std::swap(out.meta.score_a, out.meta.score_b);
  out.label = Complement(pair.label);
  out.is_swap = !pair.is_swap;
  return out;
}

PairGenerationResult GeneratePairs(const ScoredLeaderboard& leaderboard,
                                   const SplitAssignment& assignment,
                                   SplitSide side,
                                   const PairGenerationOptions& options) {
  PairGenerationResult result;
  if (!leaderboard.HasResearchGoal()) {
    result.skip_reason = "no research goal";
    return result;
  }
  if (!(leaderboard.sigma > 0.0)) {
    result.skip_reason = "zero score standard deviation";
    return result;
  }
  std::vector<const PoolIdea*> members;
  for (const auto& idea : leaderboard.pool) {
    if (assignment.Find(idea.idea_id) == side) members.push_back(&idea);
  }
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      const double gap = std::abs(members[i]->score - members[j]->score);
      const double delta = gap / leaderboard.sigma;
      // Exact ties have no winner.
      if (gap == 0.0) continue;
      SigmaTier tier = SigmaTier::kNone;
      if (options.require_window) {
        tier = SigmaTierOf(delta, options.windows);
        if (tier == SigmaTier::kNone) continue;
      }
      const PoolIdea& winner = members[i]->score > members[j]->score ? *members[i] : *members[j];
      const PoolIdea& loser = &winner == members[i] ? *members[j] : *members[i];

      IdeaPair pair;
      pair.benchmark_id = leaderboard.benchmark_id;
      pair.pair_id = leaderboard.benchmark_id + "|" + winner.idea_id + "|" + loser.idea_id;
      pair.partner_id = leaderboard.benchmark_id + "|" + loser.idea_id + "|" + winner.idea_id;
      pair.research_goal = *leaderboard.research_goal;
      pair.idea_a = winner.description;
      pair.idea_b = loser.description;
      pair.idea_a_id = winner.idea_id;
      pair.idea_b_id = loser.idea_id;
      pair.label = Label::kIdeaA;
      pair.sigma_tier = tier;
      pair.delta = delta;
      pair.is_swap = false;
      pair.meta = {winner.year,  loser.year,   winner.char_length,
                   loser.char_length, winner.score, loser.score};
      result.pairs.push_back(pair);
      result.pairs.push_back(SwapPair(pair));
    }
  }
  return result;
}

nlohmann::ordered_json ToJson(const IdeaPair& pair) {
  auto optional_int = [](const std::optional<int>& v) -> ordered_json {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json meta = {{"year_A", optional_int(pair.meta.year_a)},
                       {"year_B", optional_int(pair.meta.year_b)},
                       {"len_A", pair.meta.len_a},
                       {"len_B", pair.meta.len_b},
                       {"score_A", pair.meta.score_a},
                       {"score_B", pair.meta.score_b}};
  ordered_json out = {
      {"pair_id", pair.pair_id},
      {"partner_id", pair.partner_id},
      {"benchmark_id", pair.benchmark_id},
      {"research_goal", pair.research_goal},
      {"idea_A", pair.idea_a},
      {"idea_B", pair.idea_b},
      {"label", ToInt(pair.label)},
      {"sigma_tier", pair.sigma_tier == SigmaTier::kNone ? ordered_json(nullptr)
                                                         : ordered_json(TierName(pair.sigma_tier))},
      {"delta", pair.delta},
      {"is_swap", pair.is_swap},
      {"meta", meta}};
  if (pair.idea_a_id) out["idea_id_A"] = *pair.idea_a_id;
  if (pair.idea_b_id) out["idea_id_B"] = *pair.idea_b_id;
  if (pair.reasoning) out["reasoning"] = *pair.reasoning;
  return out;
}

IdeaPair PairFromJson(const json& record) {
  if (!record.is_object()) throw DataError("pair record is not an object");
  IdeaPair pair;
  pair.pair_id = Required<std::string>(record, "pair_id");
  pair.partner_id = Required<std::string>(record, "partner_id");
  pair.benchmark_id = Required<std::string>(record, "benchmark_id");
  pair.research_goal = Required<std::string>(record, "research_goal");
  pair.idea_a = Required<std::string>(record, "idea_A");
  pair.idea_b = Required<std::string>(record, "idea_B");
  const int label = Required<int>(record, "label");
  if (label != 0 && label != 1) throw DataError("label must be 0 or 1");
  pair.label = static_cast<Label>(label);
  const auto tier = record.find("sigma_tier");
  if (tier != record.end() && !tier->is_null()) {
    const auto parsed = tier->is_string() ? ParseTierName(tier->get<std::string>())
                                          : std::nullopt;
    if (!parsed) throw DataError("unknown sigma_tier");
    pair.sigma_tier = *parsed;
  }
  pair.delta = Required<double>(record, "delta");
  pair.is_swap = Required<bool>(record, "is_swap");
  const auto meta = record.find("meta");
  if (meta != record.end() && meta->is_object()) {
    pair.meta.year_a = OptionalInt(*meta, "year_A");
    pair.meta.year_b = OptionalInt(*meta, "year_B");
    pair.meta.len_a = meta->value("len_A", Utf8Length(pair.idea_a));
    pair.meta.len_b = meta->value("len_B", Utf8Length(pair.idea_b));
    pair.meta.score_a = meta->value("score_A", 0.0);
    pair.meta.score_b = meta->value("score_B", 0.0);
  } else {
    pair.meta.len_a = Utf8Length(pair.idea_a);
    pair.meta.len_b = Utf8Length(pair.idea_b);
  }
  if (record.contains("idea_id_A")) pair.idea_a_id = Required<std::string>(record, "idea_id_A");
  if (record.contains("idea_id_B")) pair.idea_b_id = Required<std::string>(record, "idea_id_B");
  if (record.contains("reasoning") && record["reasoning"].is_string()) {
    pair.reasoning = record["reasoning"].get<std::string>();
  }
  return pair;
}

void WritePairs(std::span<const IdeaPair> pairs, std::ostream& out) {
  for (const IdeaPair& pair : pairs) out << ToJson(pair).dump() << '\n';
}

std::vector<IdeaPair> ReadPairs(std::istream& in) {
  std::vector<IdeaPair> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded()) {
      throw DataError("line " + std::to_string(line_no) + ": malformed JSON");
    }
    try {
      pairs.push_back(PairFromJson(record));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

std::vector<IdeaPair> ReadPairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return ReadPairs(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::map<std::string, std::size_t> IndexPairs(std::span<const IdeaPair> pairs) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!index.emplace(pairs[i].pair_id, i).second) {
      throw DataError("duplicate pair_id " + pairs[i].pair_id);
    }
  }
  std::vector<std::string> orphans;
  for (const IdeaPair& pair : pairs) {
    if (!index.count(pair.partner_id)) orphans.push_back(pair.pair_id);
  }
  if (!orphans.empty()) {
    std::string message = "pairs without a swap twin:";
    for (const auto& id : orphans) message += " " + id;
    throw DataError(message);
  }
  return index;
}

nlohmann::json ToJson(const SplitResult& split) {
  json boards = json::array();
  int train = 0, test = 0;
  for (const auto& [id, side] : split.assignment.side) {
    (side == SplitSide::kTest ? test : train)++;
  }
  for (const auto& report : split.reports) {
    json buckets = json::array();
    for (const auto& b : report.buckets) {
      json years = json::array();
      for (const auto& y : b.years) years.push_back(y ? json(*y) : json(nullptr));
      buckets.push_back({{"years", years},
                         {"ideas", b.idea_count},
                         {"papers", b.paper_count},
                         {"test_ideas", b.test_ideas},
                         {"test_papers", b.test_papers},
                         {"valid", b.valid}});
    }
    boards.push_back({{"benchmark_id", report.benchmark_id},
                      {"ideas", report.idea_count},
                      {"all_train", report.all_train},
                      {"preassigned", report.preassigned},
                      {"buckets", buckets}});
  }
  return {{"train_ideas", train}, {"test_ideas", test}, {"leaderboards", boards}};
}

void WriteManifest(const SplitAssignment& assignment, std::ostream& out) {
  for (const auto& [id, side] : assignment.side) {
    ordered_json record = {{"idea_id", id},
                           {"side", SideName(side)},
                           {"benchmark_id", assignment.provenance.at(id)}};
    out << record.dump() << '\n';
  }
}

}  // namespace ideaforecast
