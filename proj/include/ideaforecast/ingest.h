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

// Loading of local leaderboard dumps.
//
// A corpus directory holds one `ideas.jsonl` file plus any number of other
// `*.jsonl` files, each carrying leaderboard records (one JSON object per
// line). Malformed records are rejected individually and reported; they never
// abort the whole parse.
//
// Leaderboard record:
//   {"benchmark_id", "task_name", "dataset_name", "research_goal" (nullable),
//    "entries": [{"entry_id", "rank", "metrics": {name: number|null},
//                 "idea_id", "paper_year", "rr_paper_id"}]}
// Idea record:
//   {"idea_id", "description", "source_paper_id", "year"}

#ifndef IDEAFORECAST_INGEST_H_
#define IDEAFORECAST_INGEST_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace ideaforecast {

inline constexpr char kIdeaFileName[] = "ideas.jsonl";

struct LeaderboardEntry {
  std::string entry_id;
  int rank = 1;
  // Only reported values; a missing or null metric is absent from the map.
  std::map<std::string, double> metrics;
  std::string idea_id;
  std::optional<int> paper_year;
  std::string rr_paper_id;
};

struct Leaderboard {
  std::string benchmark_id;
  std::string task_name;
  std::string dataset_name;
  std::optional<std::string> research_goal;
  std::vector<LeaderboardEntry> entries;

  // True when a non-empty research goal is attached.
  bool HasResearchGoal() const {
    return research_goal.has_value() && !research_goal->empty();
  }
};

struct Idea {
  std::string idea_id;
  std::string description;
  std::string source_paper_id;
  // Absent when the source does not report a year.
  std::optional<int> year;
  std::int64_t char_length = 0;
};

struct Corpus {
  // Sorted by benchmark_id.
  std::vector<Leaderboard> leaderboards;
  std::map<std::string, Idea> ideas;

  const Idea* FindIdea(const std::string& idea_id) const;
};

struct Rejection {
  std::string file;
  int line_no = 0;
  std::string reason;
  // Set when a single entry inside an otherwise valid record was rejected.
  std::optional<std::string> entry_id;
};

struct ParseResult {
  Corpus corpus;
  std::vector<Rejection> rejections;
  // Counts of non-blank lines; entry-level rejections are not included.
  int input_records = 0;
  int accepted_records = 0;
  int rejected_records = 0;
};

// Parses a corpus directory. Throws DataError if the path is not a directory.
ParseResult ParseCorpus(const std::filesystem::path& input_dir);

// Parses in-memory record texts. `leaderboard_files` maps a file label to its
// contents and is processed in key order; `ideas_text` may be empty.
ParseResult ParseCorpusText(
    const std::string& ideas_text,
    const std::map<std::string, std::string>& leaderboard_files);

struct LeaderboardValidation {
  std::string benchmark_id;
  bool has_research_goal = false;
  // Ranks shared by more than one entry, ascending.
  std::vector<int> duplicate_ranks;
  // Idea ids referenced by more than one entry, ascending.
  std::vector<std::string> duplicate_ideas;
  // Fraction of entries reporting each metric.
  std::map<std::string, double> metric_coverage;
  int entry_count = 0;

  std::vector<std::string> Flags() const;
};

struct ValidationReport {
  std::vector<LeaderboardValidation> leaderboards;
};

ValidationReport Validate(const Corpus& corpus);

nlohmann::json ToJson(const Rejection& rejection);
nlohmann::json ToJson(const ValidationReport& report);

}  // namespace ideaforecast

#endif  // IDEAFORECAST_INGEST_H_
