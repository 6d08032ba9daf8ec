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

#include "ideaforecast/ingest.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "ideaforecast/common.h"

namespace ideaforecast {
namespace {

using nlohmann::json;

// Outcome of parsing one line: either a value or a rejection reason.
template <typename T>
struct Parsed {
  std::optional<T> value;
  std::string reason;
};

bool IsIntegral(const json& value) {
  return value.is_number_integer() || value.is_number_unsigned();
}

std::optional<std::string> RequireString(const json& object, const char* key,
                                         std::string* out) {
  const auto it = object.find(key);
  if (it == object.end() || !it->is_string()) {
    return std::string("missing or non-string field \"") + key + "\"";
  }
  *out = it->get<std::string>();
  return std::nullopt;
}

// Accepts an integer or null/missing (unknown year).
std::optional<std::string> OptionalYear(const json& object, const char* key,
                                        std::optional<int>* out) {
  const auto it = object.find(key);
  if (it == object.end() || it->is_null()) {
    out->reset();
    return std::nullopt;
  }
  if (!IsIntegral(*it)) {
    return std::string("non-integer field \"") + key + "\"";
  }
  *out = it->get<int>();
  return std::nullopt;
}

Parsed<Idea> ParseIdea(const json& record) {
  if (!record.is_object()) return {std::nullopt, "record is not an object"};
  Idea idea;
  for (auto [key, out] : {std::pair{"idea_id", &idea.idea_id},
                          std::pair{"description", &idea.description},
                          std::pair{"source_paper_id", &idea.source_paper_id}}) {
    if (auto error = RequireString(record, key, out)) return {std::nullopt, *error};
  }
  if (auto error = OptionalYear(record, "year", &idea.year)) {
    return {std::nullopt, *error};
  }
  if (idea.idea_id.empty()) return {std::nullopt, "empty idea_id"};
  if (idea.description.empty()) return {std::nullopt, "empty description"};
  idea.char_length = Utf8Length(idea.description);
  return {std::move(idea), ""};
}

Parsed<LeaderboardEntry> ParseEntry(const json& record) {
  if (!record.is_object()) return {std::nullopt, "entry is not an object"};
  LeaderboardEntry entry;
  for (auto [key, out] :
       {std::pair{"entry_id", &entry.entry_id}, std::pair{"idea_id", &entry.idea_id},
        std::pair{"rr_paper_id", &entry.rr_paper_id}}) {
    if (auto error = RequireString(record, key, out)) return {std::nullopt, *error};
  }
  const auto rank = record.find("rank");
  if (rank == record.end() || !IsIntegral(*rank)) {
    return {std::nullopt, "missing or non-integer rank"};
  }
  if (rank->get<std::int64_t>() < 1) return {std::nullopt, "rank must be >= 1"};
  entry.rank = rank->get<int>();
  if (auto error = OptionalYear(record, "paper_year", &entry.paper_year)) {
    return {std::nullopt, *error};
  }
  const auto metrics = record.find("metrics");
  if (metrics == record.end() || !metrics->is_object()) {
    return {std::nullopt, "missing metrics object"};
  }
  for (const auto& [name, value] : metrics->items()) {
    if (value.is_null()) continue;
    if (!value.is_number()) return {std::nullopt, "non-numeric metric \"" + name + "\""};
    entry.metrics[name] = value.get<double>();
  }
  if (entry.metrics.empty()) return {std::nullopt, "no metric values"};
  return {std::move(entry), ""};
}

// Parses the leaderboard header; entries are handled by the caller so that
// they can be rejected one by one.
Parsed<Leaderboard> ParseLeaderboardHeader(const json& record) {
  if (!record.is_object()) return {std::nullopt, "record is not an object"};
  Leaderboard board;
  for (auto [key, out] :
       {std::pair{"benchmark_id", &board.benchmark_id},
        std::pair{"task_name", &board.task_name},
        std::pair{"dataset_name", &board.dataset_name}}) {
    if (auto error = RequireString(record, key, out)) return {std::nullopt, *error};
  }
  if (board.benchmark_id.empty()) return {std::nullopt, "empty benchmark_id"};
  const auto goal = record.find("research_goal");
  if (goal != record.end() && !goal->is_null()) {
    if (!goal->is_string()) return {std::nullopt, "non-string research_goal"};
    board.research_goal = goal->get<std::string>();
  }
  const auto entries = record.find("entries");
  if (entries == record.end() || !entries->is_array()) {
    return {std::nullopt, "missing entries array"};
  }
  return {std::move(board), ""};
}

// Calls `fn(line_no, line)` for each non-blank line.
template <typename Fn>
void ForEachLine(const std::string& text, Fn fn) {
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    fn(line_no, line);
  }
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

const Idea* Corpus::FindIdea(const std::string& idea_id) const {
  const auto it = ideas.find(idea_id);
  return it == ideas.end() ? nullptr : &it->second;
}

ParseResult ParseCorpusText(
    const std::string& ideas_text,
    const std::map<std::string, std::string>& leaderboard_files) {
  ParseResult result;
  auto reject = [&result](const std::string& file, int line_no, std::string reason,
                          std::optional<std::string> entry_id = std::nullopt) {
    result.rejections.push_back({file, line_no, std::move(reason), std::move(entry_id)});
  };

  ForEachLine(ideas_text, [&](int line_no, const std::string& line) {
    ++result.input_records;
    const json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded()) {
      reject(kIdeaFileName, line_no, "malformed JSON");
      ++result.rejected_records;
      return;
    }
    auto parsed = ParseIdea(record);
    if (parsed.value && result.corpus.ideas.count(parsed.value->idea_id)) {
      parsed = {std::nullopt, "duplicate idea_id \"" + parsed.value->idea_id + "\""};
    }
    if (!parsed.value) {
      reject(kIdeaFileName, line_no, parsed.reason);
      ++result.rejected_records;
      return;
    }
    ++result.accepted_records;
    std::string id = parsed.value->idea_id;
    result.corpus.ideas.emplace(std::move(id), std::move(*parsed.value));
  });

  std::set<std::string> seen_benchmarks;
  for (const auto& [file, text] : leaderboard_files) {
    ForEachLine(text, [&](int line_no, const std::string& line) {
      ++result.input_records;
      const json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (record.is_discarded()) {
        reject(file, line_no, "malformed JSON");
        ++result.rejected_records;
        return;
      }
      auto header = ParseLeaderboardHeader(record);
      if (header.value && seen_benchmarks.count(header.value->benchmark_id)) {
        header = {std::nullopt,
                  "duplicate benchmark_id \"" + header.value->benchmark_id + "\""};
      }
      if (!header.value) {
        reject(file, line_no, header.reason);
        ++result.rejected_records;
        return;
      }
      Leaderboard board = std::move(*header.value);
      std::set<std::string> entry_ids;
      int index = 0;
      for (const json& raw : record.at("entries")) {
        auto entry = ParseEntry(raw);
        std::optional<std::string> label;
        if (raw.is_object() && raw.contains("entry_id") && raw["entry_id"].is_string()) {
          label = raw["entry_id"].get<std::string>();
        } else {
          label = "#" + std::to_string(index);
        }
        ++index;
        if (!entry.value) {
          reject(file, line_no, entry.reason, label);
          continue;
        }
        if (!entry_ids.insert(entry.value->entry_id).second) {
          reject(file, line_no, "duplicate entry_id", label);
          continue;
        }
        if (result.corpus.FindIdea(entry.value->idea_id) == nullptr) {
          reject(file, line_no, "unresolved idea reference", label);
          continue;
        }
        board.entries.push_back(std::move(*entry.value));
      }
      seen_benchmarks.insert(board.benchmark_id);
      result.corpus.leaderboards.push_back(std::move(board));
      ++result.accepted_records;
    });
  }
  std::sort(result.corpus.leaderboards.begin(), result.corpus.leaderboards.end(),
            [](const Leaderboard& a, const Leaderboard& b) {
              return a.benchmark_id < b.benchmark_id;
            });
  return result;
}

ParseResult ParseCorpus(const std::filesystem::path& input_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(input_dir)) {
    throw DataError("input path is not a directory: " + input_dir.string());
  }
  std::string ideas_text;
  std::map<std::string, std::string> leaderboard_files;
  for (const auto& item : fs::directory_iterator(input_dir)) {
    if (!item.is_regular_file() || item.path().extension() != ".jsonl") continue;
    const std::string name = item.path().filename().string();
    if (name == kIdeaFileName) {
      ideas_text = ReadFile(item.path());
    } else {
      leaderboard_files.emplace(name, ReadFile(item.path()));
    }
  }
  return ParseCorpusText(ideas_text, leaderboard_files);
}

std::vector<std::string> LeaderboardValidation::Flags() const {
  std::vector<std::string> flags;
  if (!has_research_goal) flags.push_back("no research goal");
  for (const int rank : duplicate_ranks) {
    flags.push_back("duplicate rank " + std::to_string(rank));
  }
  for (const auto& idea : duplicate_ideas) {
    flags.push_back("duplicate idea " + idea);
  }
  return flags;
}

ValidationReport Validate(const Corpus& corpus) {
  ValidationReport report;
  for (const Leaderboard& board : corpus.leaderboards) {
    LeaderboardValidation item;
    item.benchmark_id = board.benchmark_id;
    item.has_research_goal = board.HasResearchGoal();
    item.entry_count = static_cast<int>(board.entries.size());
    std::map<int, int> rank_counts;
    std::map<std::string, int> idea_counts;
    std::map<std::string, int> metric_counts;
    for (const LeaderboardEntry& entry : board.entries) {
      ++rank_counts[entry.rank];
      ++idea_counts[entry.idea_id];
      for (const auto& [name, value] : entry.metrics) ++metric_counts[name];
    }
    for (const auto& [rank, count] : rank_counts) {
      if (count > 1) item.duplicate_ranks.push_back(rank);
    }
    for (const auto& [idea, count] : idea_counts) {
      if (count > 1) item.duplicate_ideas.push_back(idea);
    }
    for (const auto& [name, count] : metric_counts) {
      item.metric_coverage[name] =
          static_cast<double>(count) / static_cast<double>(board.entries.size());
    }
    report.leaderboards.push_back(std::move(item));
  }
  return report;
}

nlohmann::json ToJson(const Rejection& rejection) {
  json out = {{"line_no", rejection.line_no}, {"reason", rejection.reason},
              {"file", rejection.file}};
  if (rejection.entry_id) out["entry_id"] = *rejection.entry_id;
  return out;
}

nlohmann::json ToJson(const ValidationReport& report) {
  json boards = json::array();
  for (const auto& item : report.leaderboards) {
    boards.push_back({{"benchmark_id", item.benchmark_id},
                      {"entry_count", item.entry_count},
                      {"has_research_goal", item.has_research_goal},
                      {"duplicate_ranks", item.duplicate_ranks},
                      {"duplicate_ideas", item.duplicate_ideas},
                      {"metric_coverage", item.metric_coverage},
                      {"flags", item.Flags()}});
  }
  return {{"leaderboards", boards}};
}

}  // namespace ideaforecast
