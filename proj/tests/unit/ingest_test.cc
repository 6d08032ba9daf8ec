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

#include <gtest/gtest.h>

#include "support/synthetic.h"

namespace ideaforecast {
namespace {

using nlohmann::json;

std::string IdeaLine(const std::string& id, std::optional<int> year = 2020) {
  json idea = {{"idea_id", id}, {"description", "text of " + id}, {"source_paper_id", "p-" + id}};
  idea["year"] = year ? json(*year) : json(nullptr);
  return idea.dump() + "\n";
}

json Entry(const std::string& id, int rank, const std::string& idea, json metrics) {
  return {{"entry_id", id}, {"rank", rank},        {"metrics", std::move(metrics)},
          {"idea_id", idea}, {"paper_year", 2020}, {"rr_paper_id", "rr-" + id}};
}

std::string BoardLine(const std::string& id, json entries, json goal = "goal") {
  return json{{"benchmark_id", id},
              {"task_name", "task"},
              {"dataset_name", "data"},
              {"research_goal", std::move(goal)},
              {"entries", std::move(entries)}}
             .dump() +
         "\n";
}

TEST(ParseCorpus, EmptyDirectoryGivesEmptyCorpus) {
  testing::TempDir dir;
  const ParseResult result = ParseCorpus(dir.path());
  EXPECT_TRUE(result.corpus.leaderboards.empty());
  EXPECT_TRUE(result.corpus.ideas.empty());
  EXPECT_TRUE(result.rejections.empty());
  EXPECT_EQ(result.input_records, 0);
}

TEST(ParseCorpus, MissingDirectoryIsADataError) {
  EXPECT_THROW(ParseCorpus("/nonexistent/ideaforecast"), DataError);
}

TEST(ParseCorpus, MinimalLeaderboard) {
  testing::TempDir dir;
  testing::WriteText(dir.path() / "ideas.jsonl", IdeaLine("i1") + IdeaLine("i2"));
  testing::WriteText(dir.path() / "board.jsonl",
                     BoardLine("bm", {Entry("e1", 1, "i1", {{"acc", 0.9}}),
                                      Entry("e2", 2, "i2", {{"acc", 0.8}})}));
  const ParseResult result = ParseCorpus(dir.path());
  ASSERT_EQ(result.corpus.leaderboards.size(), 1u);
  EXPECT_EQ(result.corpus.leaderboards[0].entries.size(), 2u);
  EXPECT_EQ(result.corpus.ideas.size(), 2u);
  EXPECT_TRUE(result.rejections.empty());
}

TEST(ParseCorpus, UnknownIdeaRejectsTheEntryOnly) {
  const ParseResult result = ParseCorpusText(
      IdeaLine("i1"), {{"b.jsonl", BoardLine("bm", {Entry("e1", 1, "i1", {{"acc", 1.0}}),
                                                      Entry("e2", 2, "X", {{"acc", 0.5}})})}});
  ASSERT_EQ(result.rejections.size(), 1u);
  EXPECT_EQ(result.rejections[0].reason, "unresolved idea reference");
  EXPECT_EQ(result.rejections[0].entry_id, "e2");
  EXPECT_EQ(result.rejections[0].line_no, 1);
  ASSERT_EQ(result.corpus.leaderboards.size(), 1u);
  EXPECT_EQ(result.corpus.leaderboards[0].entries.size(), 1u);
  EXPECT_EQ(result.accepted_records, 2);
}

TEST(ParseCorpus, MalformedRecordsAreRejectedIndividually) {
  const std::string ideas = IdeaLine("i1") + "{not json\n" + IdeaLine("i1") +
                            "{\"idea_id\": \"i9\"}\n\n" + IdeaLine("i2", std::nullopt);
  const ParseResult result = ParseCorpusText(ideas, {});
  EXPECT_EQ(result.input_records, 5);
  EXPECT_EQ(result.accepted_records, 2);
  EXPECT_EQ(result.rejected_records, 3);
  ASSERT_EQ(result.rejections.size(), 3u);
  EXPECT_EQ(result.rejections[0].reason, "malformed JSON");
  EXPECT_EQ(result.rejections[0].line_no, 2);
  EXPECT_EQ(result.rejections[1].reason, "duplicate idea_id \"i1\"");
  EXPECT_EQ(result.rejections[2].line_no, 4);
  EXPECT_FALSE(result.corpus.ideas.at("i2").year.has_value());
}

TEST(ParseCorpus, EntryLevelChecks) {
  const ParseResult result = ParseCorpusText(
      IdeaLine("i1") + IdeaLine("i2"),
      {{"b.jsonl",
        BoardLine("bm", {Entry("e1", 1, "i1", {{"acc", 1.0}}), Entry("e1", 2, "i2", {{"acc", 0.5}}),
                         Entry("e3", 0, "i2", {{"acc", 0.5}}),
                         Entry("e4", 3, "i2", {{"acc", nullptr}}),
                         Entry("e5", 3, "i2", {{"acc", "high"}})})}});
  std::vector<std::string> reasons;
  for (const auto& r : result.rejections) reasons.push_back(r.reason);
  EXPECT_EQ(reasons, (std::vector<std::string>{"duplicate entry_id", "rank must be >= 1",
                                               "no metric values", "non-numeric metric \"acc\""}));
}

TEST(ParseCorpus, NullMetricIsAbsent) {
  const ParseResult result = ParseCorpusText(
      IdeaLine("i1"),
      {{"b.jsonl", BoardLine("bm", {Entry("e1", 1, "i1", {{"acc", 1.0}, {"f1", nullptr}})})}});
  const auto& metrics = result.corpus.leaderboards.at(0).entries.at(0).metrics;
  EXPECT_EQ(metrics.size(), 1u);
  EXPECT_EQ(metrics.count("f1"), 0u);
}

TEST(ParseCorpus, CharLengthCountsCodePoints) {
  const std::string line =
      json{{"idea_id", "u"}, {"description", "\xC3\xA9t\xC3\xA9"}, {"source_paper_id", "p"},
           {"year", 2020}}
          .dump() +
      "\n";
  const ParseResult result = ParseCorpusText(line, {});
  EXPECT_EQ(result.corpus.ideas.at("u").char_length, 3);
}

TEST(Validate, FlagsGoalRanksAndCoverage) {
  const ParseResult result = ParseCorpusText(
      IdeaLine("i1") + IdeaLine("i2") + IdeaLine("i3") + IdeaLine("i4"),
      {{"b.jsonl", BoardLine("bm",
                             {Entry("e1", 1, "i1", {{"acc", 1.0}, {"F1", 1.0}}),
                              Entry("e2", 1, "i2", {{"acc", 0.9}, {"F1", 0.9}}),
                              Entry("e3", 3, "i3", {{"acc", 0.8}, {"F1", 0.8}}),
                              Entry("e4", 4, "i3", {{"acc", 0.7}})},
                             nullptr)}});
  const ValidationReport report = Validate(result.corpus);
  ASSERT_EQ(report.leaderboards.size(), 1u);
  const auto& v = report.leaderboards[0];
  EXPECT_FALSE(v.has_research_goal);
  EXPECT_DOUBLE_EQ(v.metric_coverage.at("F1"), 0.75);
  EXPECT_DOUBLE_EQ(v.metric_coverage.at("acc"), 1.0);
  EXPECT_EQ(v.Flags(), (std::vector<std::string>{"no research goal", "duplicate rank 1",
                                                 "duplicate idea i3"}));
}

TEST(ParseCorpus, EmptyGoalCountsAsMissing) {
  const ParseResult result = ParseCorpusText(
      IdeaLine("i1"), {{"b.jsonl", BoardLine("bm", {Entry("e1", 1, "i1", {{"a", 1.0}})}, "")}});
  EXPECT_FALSE(result.corpus.leaderboards.at(0).HasResearchGoal());
}

// Property: parsing is deterministic and record counts add up.
TEST(ParseCorpusProperty, DeterministicAndCountsBalance) {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::string ideas, boards;
    for (int i = 0; i < 8; ++i) {
      ideas += rng.UniformIndex(5) == 0 ? "garbage\n" : IdeaLine("i" + std::to_string(i));
    }
    for (int b = 0; b < 4; ++b) {
      json entries = json::array();
      for (int e = 0; e < 4; ++e) {
        entries.push_back(Entry("e" + std::to_string(e), e + 1,
                                "i" + std::to_string(rng.UniformIndex(10)),
                                {{"acc", static_cast<double>(rng.UniformIndex(100))}}));
      }
      boards += rng.UniformIndex(6) == 0 ? "[1,2]\n" : BoardLine("bm" + std::to_string(b), entries);
    }
    const ParseResult first = ParseCorpusText(ideas, {{"b.jsonl", boards}});
    const ParseResult second = ParseCorpusText(ideas, {{"b.jsonl", boards}});
    EXPECT_EQ(first.accepted_records + first.rejected_records, first.input_records);
    EXPECT_EQ(ToJson(Validate(first.corpus)), ToJson(Validate(second.corpus)));
    ASSERT_EQ(first.rejections.size(), second.rejections.size());
    for (std::size_t i = 0; i < first.rejections.size(); ++i) {
      EXPECT_EQ(ToJson(first.rejections[i]), ToJson(second.rejections[i]));
    }
  }
}

TEST(RejectionJson, CarriesEntryIdOnlyWhenSet) {
  const json record = ToJson(Rejection{"f.jsonl", 3, "bad", std::nullopt});
  EXPECT_FALSE(record.contains("entry_id"));
  EXPECT_EQ(record.at("line_no"), 3);
  EXPECT_EQ(ToJson(Rejection{"f.jsonl", 3, "bad", "e1"}).at("entry_id"), "e1");
}

}  // namespace
}  // namespace ideaforecast
