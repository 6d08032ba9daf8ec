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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ideaforecast/calibration.h"
#include "ideaforecast/cli.h"
#include "ideaforecast/evaluation.h"
#include "ideaforecast/predictor.h"
#include "ideaforecast/random.h"
#include "ideaforecast/ranking.h"
#include "ideaforecast/reward.h"
#include "ideaforecast/scoring.h"
#include "support/synthetic.h"

namespace ideaforecast {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failed expectation.
class Check {
 public:
  void Expect(bool condition, const std::string& what) {
    if (!condition && outcome_.pass) {
      outcome_.pass = false;
      outcome_.detail = what;
    }
  }
  bool ok() const { return outcome_.pass; }
  Outcome Done(const std::string& summary) {
    if (outcome_.pass) outcome_.detail = summary;
    return outcome_;
  }

 private:
  Outcome outcome_;
};

std::string Num(double v, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

RunOptions Quiet() {
  RunOptions options;
  options.sleep = [](std::chrono::milliseconds) {};
  return options;
}

// 1. Always-inconsistent replay over ten 4-idea leaderboards.
Outcome DegenerateRmse() {
  Check check;
  Rng rng(101);
  std::vector<IdeaPair> pairs;
  for (int b = 0; b < 10; ++b) {
    ScoredLeaderboard board;
    board.benchmark_id = "bm-" + std::to_string(b);
    board.research_goal = "goal";
    SplitAssignment assignment;
    for (int i = 0; i < 4; ++i) {
      PoolIdea idea;
      idea.idea_id = board.benchmark_id + "-idea-" + std::to_string(i);
      idea.description = "idea " + std::to_string(i);
      idea.source_paper_id = idea.idea_id;
      idea.score = 0.1 + 0.2 * i + 0.05 * rng.UniformDouble();
      idea.rank = 4 - i;
      board.pool.push_back(idea);
      assignment.side[idea.idea_id] = SplitSide::kTest;
    }
    board.sigma = 0.25;
    PairGenerationOptions options;
    options.require_window = false;
    const auto generated = GeneratePairs(board, assignment, SplitSide::kTest, options);
    pairs.insert(pairs.end(), generated.pairs.begin(), generated.pairs.end());
  }
  // "Answer: 1" on both twins names different ideas, so every comparison drops.
  std::map<std::string, BackendReply> replies;
  for (const auto& p : pairs) replies[p.pair_id] = {"Answer: 1", std::nullopt};
  ReplayBackend replay("replay-always-inconsistent", replies);
  const auto predictions = RunPredictions(pairs, replay, Quiet());
  const auto report = RankFromPredictions(pairs, predictions);
  check.Expect(report.leaderboards.size() == 10, "expected 10 ranked leaderboards");
  for (const auto& board : report.leaderboards) {
    check.Expect(std::abs(board.rmse - 1.8708) <= 0.001,
                 board.benchmark_id + " rmse " + Num(board.rmse));
  }
  check.Expect(report.median_rmse && std::abs(*report.median_rmse - 1.8708) <= 0.001,
               "median rmse off");
  return check.Done("median RMSE " + Num(report.median_rmse.value_or(-1)) + " over " +
                    std::to_string(report.leaderboards.size()) + " leaderboards");
}

// 2. Reward totals over the correctness x think x answer-tag grid.
Outcome RewardEnumeration() {
  Check check;
  std::set<double> totals;
  for (int correct = 0; correct < 2; ++correct) {
    for (int think = 0; think < 2; ++think) {
      for (int tag = 0; tag < 2; ++tag) {
        ParsedResponse parsed;
        parsed.think_present = think == 1;
        parsed.answer_tag_present = tag == 1;
        parsed.answer = correct ? Label::kIdeaA : Label::kIdeaB;
        parsed.char_length = 1000;
        totals.insert(ScoreResponse(parsed, Label::kIdeaA).total);
      }
    }
  }
  check.Expect(totals == std::set<double>{-4, -3, -2, 2, 3, 4}, "grid totals differ");
  const std::string tail = "</think>\nAnswer: 1";
  const std::string text = "<think>" + std::string(599 - 7 - tail.size(), 'r') + tail;
  const ParsedResponse parsed = ParseResponse(text);
  check.Expect(parsed.char_length == 599, "fixture is not 599 characters");
  PenaltyConfig penalty;
  penalty.enabled = true;
  penalty.magnitude = 1.0;
  const double total = ScoreResponse(parsed, Label::kIdeaA, penalty).total;
  check.Expect(total == 3.0, "599-character total " + Num(total));
  return check.Done("grid {-4,-3,-2,2,3,4}; 599 chars with penalty -> " + Num(total, 1));
}

// 3. Label balance, swap closure, tier exclusivity, disjoint split.
Outcome DatasetBalance() {
  Check check;
  testing::CorpusShape shape;
  shape.leaderboards = 200;
  shape.shared_idea_rate = 0.15;
  const Corpus corpus = testing::RandomCorpus(2024, shape);
  const auto boards = testing::ScoreCorpus(corpus);
  const SplitResult split = BucketAndSplit(boards, 77);
  const SigmaWindows windows;
  std::vector<IdeaPair> all;
  std::set<std::string> train_ideas, test_ideas;
  for (const auto& board : boards) {
    for (const SplitSide side : {SplitSide::kTrain, SplitSide::kTest}) {
      const auto generated = GeneratePairs(board, split.assignment, side);
      for (const auto& p : generated.pairs) {
        auto& ideas = side == SplitSide::kTrain ? train_ideas : test_ideas;
        ideas.insert(*p.idea_a_id);
        ideas.insert(*p.idea_b_id);
        all.push_back(p);
      }
    }
  }
  check.Expect(all.size() > 1000, "too few pairs: " + std::to_string(all.size()));
  std::map<std::string, const IdeaPair*> by_id;
  int ones = 0;
  for (const auto& p : all) {
    check.Expect(by_id.emplace(p.pair_id, &p).second, "duplicate pair " + p.pair_id);
    ones += ToInt(p.label);
  }
  check.Expect(2 * ones == static_cast<int>(all.size()), "labels not 50/50");
  for (const auto& p : all) {
    const auto it = by_id.find(p.partner_id);
    check.Expect(it != by_id.end(), "missing twin for " + p.pair_id);
    if (it == by_id.end()) continue;
    const IdeaPair& twin = *it->second;
    check.Expect(twin.partner_id == p.pair_id && ToInt(twin.label) + ToInt(p.label) == 1 &&
                     twin.idea_a == p.idea_b && twin.idea_b == p.idea_a,
                 "twin mismatch for " + p.pair_id);
    int containing = 0;
    for (const auto& w : windows.windows) {
      if (p.delta >= w.low - kWindowSlack && p.delta <= w.high + kWindowSlack) ++containing;
    }
    check.Expect(containing == 1 && SigmaTierOf(p.delta) == p.sigma_tier,
                 "tier window ambiguity at delta " + Num(p.delta, 6));
  }
  for (int i = 0; i <= 40000; ++i) {
    const double delta = i * 1e-4;
    int containing = 0;
    for (const auto& w : windows.windows) {
      if (delta >= w.low - kWindowSlack && delta <= w.high + kWindowSlack) ++containing;
    }
    check.Expect(containing <= 1, "windows overlap at " + Num(delta));
  }
  for (const auto& id : train_ideas) {
    check.Expect(!test_ideas.count(id), "idea on both sides: " + id);
  }
  return check.Done(std::to_string(all.size()) + " pairs from " +
                    std::to_string(boards.size()) + " scorable leaderboards, " +
                    std::to_string(train_ideas.size()) + " train / " +
                    std::to_string(test_ideas.size()) + " test ideas");
}

// 4. Discordance removal terminates, empties the fraction, and is idempotent.
Outcome PruneContract() {
  Check check;
  Rng rng(4242);
  int removed = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.UniformIndex(29));
    const auto entries = testing::RandomScores(rng, n);
    const PruneResult result = PruneDiscordant(entries);
    const int iterations = static_cast<int>(result.removals.size());
    removed += iterations;
    check.Expect(iterations <= n - 1, "too many iterations on trial " + std::to_string(trial));
    check.Expect(result.kept.size() < 2 || DiscordanceFraction(result.kept) == 0.0,
                 "discordance left on trial " + std::to_string(trial));
    check.Expect(result.kept.size() + result.removals.size() == entries.size(),
                 "entries lost on trial " + std::to_string(trial));
    if (result.kept.size() >= 2) {
      const PruneResult again = PruneDiscordant(result.kept);
      check.Expect(again.removals.empty() && again.kept.size() == result.kept.size(),
                   "not idempotent on trial " + std::to_string(trial));
    }
  }
  return check.Done("1000 leaderboards, " + std::to_string(removed) + " removals");
}

// 5. Brute-force consistency scoring over every answer combination.
Outcome ConsistencyOracle() {
  Check check;
  long combinations = 0;
  for (int units = 1; units <= 4; ++units) {
    const auto pairs = testing::SyntheticUnits(units, 500 + units);
    int total = 1;
    for (int i = 0; i < 2 * units; ++i) total *= 3;
    for (int code = 0; code < total; ++code) {
      // Digit 0 answers 0, 1 answers 1, 2 leaves the answer out.
      std::vector<int> digits;
      for (int c = code, i = 0; i < 2 * units; ++i, c /= 3) digits.push_back(c % 3);
      std::vector<Prediction> predictions;
      for (int i = 0; i < 2 * units; ++i) {
        std::optional<Label> answer;
        if (digits[i] != 2) answer = static_cast<Label>(digits[i]);
        predictions.push_back(testing::AnswerPrediction(pairs[i].pair_id, answer));
      }
      // The original names idea X when its answer is 1; the twin shows X in
      // position B, so it names X when its answer is 0.
      int consistent = 0, correct = 0;
      for (int u = 0; u < units; ++u) {
        const int orig = digits[u];
        const int twin = digits[u + units];
        if (orig == 2 || twin == 2) continue;
        const int orig_choice = orig == 1 ? 0 : 1;  // 0 = idea X, 1 = idea Y
        const int twin_choice = twin == 0 ? 0 : 1;
        if (orig_choice != twin_choice) continue;
        ++consistent;
        const int better = pairs[u].label == Label::kIdeaA ? 0 : 1;
        if (orig_choice == better) ++correct;
      }
      const auto report = Evaluate(JudgePairs(predictions, pairs), pairs);
      const double expected = 100.0 * correct / units;
      check.Expect(report.consistent == consistent && report.correct == correct &&
                       report.overall_accuracy == expected &&
                       report.consistency_rate == 100.0 * consistent / units,
                   "mismatch for " + std::to_string(units) + " pairs, combination " +
                       std::to_string(code));
      ++combinations;
    }
  }
  return check.Done(std::to_string(combinations) + " answer combinations agree");
}

// 6. Calibration fixtures, ECE <= MCE, and the debias identity.
Outcome CalibrationFixtures() {
  Check check;
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9; };
  const std::vector<ScoredProbability> single{{0.7, Label::kIdeaA}};
  check.Expect(near(CalibrationFromProbabilities(single).brier, 0.09), "single Brier");
  const std::vector<ScoredProbability> two_bin{
      {0.9, Label::kIdeaA}, {0.9, Label::kIdeaB}, {0.65, Label::kIdeaA}};
  const auto report = CalibrationFromProbabilities(two_bin);
  check.Expect(near(report.brier, 0.31416666666666665), "two-bin Brier " + Num(report.brier, 12));
  check.Expect(near(report.ece, 0.38333333333333336), "two-bin ECE " + Num(report.ece, 12));
  check.Expect(near(report.mce, 0.4), "two-bin MCE " + Num(report.mce, 12));
  const std::vector<ScoredProbability> perfect{{1.0, Label::kIdeaA}, {0.0, Label::kIdeaB}};
  const auto p = CalibrationFromProbabilities(perfect);
  check.Expect(p.brier == 0.0 && p.ece == 0.0 && p.mce == 0.0, "perfect fixture");
  const std::vector<ScoredProbability> coin{{0.5, Label::kIdeaA}, {0.5, Label::kIdeaB}};
  check.Expect(near(CalibrationFromProbabilities(coin).ece, 0.0), "uninformative ECE");

  Rng rng(606);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<ScoredProbability> items;
    const std::size_t n = 1 + rng.UniformIndex(60);
    for (std::size_t i = 0; i < n; ++i) {
      items.push_back({rng.UniformDouble(), static_cast<Label>(rng.UniformIndex(2))});
    }
    const auto r = CalibrationFromProbabilities(items);
    check.Expect(r.ece <= r.mce, "ECE > MCE on trial " + std::to_string(trial));
  }
  for (int i = 0; i <= 10000; ++i) {
    const double q = i / 10000.0;
    check.Expect(near(DebiasProbability(q, 1.0 - q), q), "debias identity at " + Num(q));
  }
  check.Expect(near(DebiasProbability(0.8, 0.3), 0.75), "debias example");
  return check.Done("fixtures within 1e-9; 10000 random sets with ECE <= MCE");
}

// 7. Bootstrap rejection rate under the null.
Outcome BootstrapNull() {
  Check check;
  constexpr int kTrials = 500;
  constexpr int kResamples = 2000;
  constexpr int kUnits = 120;
  int rejections = 0;
  for (int trial = 0; trial < kTrials; ++trial) {
    Rng rng(DeriveSeed(7007, static_cast<std::uint64_t>(trial)));
    std::vector<PairVerdict> verdicts;
    std::vector<std::string> ids_a, ids_b;
    for (int i = 0; i < 2 * kUnits; ++i) {
      PairVerdict v;
      v.pair_id = (i < kUnits ? "a" : "b") + std::to_string(i);
      v.consistent = v.correct_consistent = rng.UniformDouble() < 0.6;
      (i < kUnits ? ids_a : ids_b).push_back(v.pair_id);
      verdicts.push_back(v);
    }
    const auto result = BootstrapTest(verdicts, ids_a, ids_b, kResamples,
                                      DeriveSeed(9009, static_cast<std::uint64_t>(trial)));
    if (result.p_value < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / kTrials;
  check.Expect(rate >= 0.03 && rate <= 0.07, "rejection rate " + Num(rate, 3));
  return check.Done("rejection rate " + Num(rate, 3) + " over " + std::to_string(kTrials) +
                    " trials, B = " + std::to_string(kResamples));
}

int Cli(const std::vector<std::string>& args) {
  std::vector<std::string> argv{"ideaforecast"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int code = RunCli(argv, out, err);
  if (code != kExitOk) std::cerr << err.str();
  return code;
}

// Runs the documented pipeline into `dir` and returns every dataset and
// report document it wrote (predictions carry timings and are left out).
std::map<std::string, std::string> Pipeline(const fs::path& dir) {
  const std::string input = testing::FixtureDir().string();
  const fs::path data = dir / "dataset";
  std::map<std::string, std::string> files;
  if (Cli({"build-dataset", "--input", input, "--out", data.string(), "--seed", "13"}) != 0) {
    return files;
  }
  const std::string test = (data / "test.jsonl").string();
  const std::string ranking = (data / "ranking_pairs.jsonl").string();
  Cli({"predict", "--dataset", test, "--backend", "baseline:length", "--out",
       (dir / "pred").string()});
  Cli({"predict", "--dataset", ranking, "--backend", "baseline:length", "--out",
       (dir / "pred-rank").string()});
  Cli({"evaluate", "--dataset", test, "--predictions", (dir / "pred" / "predictions.jsonl").string(),
       "--out", (dir / "eval").string(), "--bootstrap-resamples", "500"});
  Cli({"rank", "--pairs", ranking, "--predictions",
       (dir / "pred-rank" / "predictions.jsonl").string(), "--out", (dir / "rank").string()});
  for (const char* sub : {"dataset", "eval", "rank"}) {
    if (!fs::exists(dir / sub)) continue;
    for (const auto& entry : fs::directory_iterator(dir / sub)) {
      files[std::string(sub) + "/" + entry.path().filename().string()] =
          testing::ReadText(entry.path());
    }
  }
  return files;
}

// 8. Byte-identical documents across runs, pinned to reference digests.
Outcome PipelineDeterminism() {
  Check check;
  testing::TempDir tmp;
  const auto first = Pipeline(tmp.path() / "run1");
  const auto second = Pipeline(tmp.path() / "run2");
  check.Expect(first.size() >= 12, "pipeline wrote " + std::to_string(first.size()) + " files");
  check.Expect(first.size() == second.size(), "file sets differ");
  for (const auto& [name, bytes] : first) {
    const auto it = second.find(name);
    check.Expect(it != second.end() && it->second == bytes, name + " differs between runs");
  }
  // Reference digests guard against byte-order or platform-dependent output.
  const std::map<std::string, std::string> pinned = {
      {"dataset/build_report.json", "9bfc201bad087ff5bb6b4e26a2bd9ada56d6f583dc55599e4d4b0da235e60832"},
      {"dataset/ranking_pairs.jsonl", "2614d8eb9a2416a805c89bb606c4090bfbd23a3301cbdd54f6c10334badc8a2d"},
      {"dataset/split_manifest.jsonl", "3a1015d8971d51d9b47de00b8b25c953d1fd41dd9a46027cd64a5911ec228c13"},
      {"dataset/test.jsonl", "1972ae065a979f5d61fa75901130214cf8c158de7b701cc7fd7f49ebf89ff4e4"},
      {"dataset/train.jsonl", "2212d7e6ac6ef1fe7dbb3c1e45fa3b4d1339946889d1cb2e3196800d7b7c32dd"},
      {"eval/evaluation.json", "fefb8132449957690c51f639137ce15bc2097eca40080bbb5a00f15cd14d0c6f"},
      {"rank/ranking.json", "21f6764c68165a512c945f055f5c071577ece13b40b778e778449d58f8de2a92"},
  };
  for (const auto& [name, digest] : pinned) {
    const auto it = first.find(name);
    check.Expect(it != first.end() && Sha256Hex(it->second) == digest,
                 name + " digest " + (it == first.end() ? "missing" : Sha256Hex(it->second)));
  }
  if (std::getenv("IDEAFORECAST_PRINT_DIGESTS") != nullptr) {
    for (const auto& [name, bytes] : first) {
      std::cout << "      {\"" << name << "\", \"" << Sha256Hex(bytes) << "\"},\n";
    }
  }
  return check.Done(std::to_string(first.size()) + " documents identical, " +
                    std::to_string(pinned.size()) + " match reference digests");
}

// 9. Baseline sanity on a large swap-augmented pair set.
Outcome BaselineSanity() {
  Check check;
  testing::CorpusShape shape;
  shape.leaderboards = 90;
  shape.min_entries = 10;
  shape.max_entries = 25;
  const auto pairs = testing::BuildPairs(testing::RandomCorpus(99, shape), 5);
  const int units = static_cast<int>(pairs.size() / 2);
  check.Expect(units >= 2000, "only " + std::to_string(units) + " units");
  auto accuracy = [&](Backend& backend) {
    const auto predictions = RunPredictions(pairs, backend, Quiet());
    return Evaluate(JudgePairs(predictions, pairs), pairs).overall_accuracy;
  };
  BaselineBackend always_a(BaselineStrategy::kAlwaysA, 0);
  const double a = accuracy(always_a);
  std::map<std::string, BackendReply> replies;
  for (const auto& p : pairs) replies[p.pair_id] = {"Answer: " + std::to_string(ToInt(p.label)), {}};
  ReplayBackend oracle("replay-oracle", replies);
  const double o = accuracy(oracle);
  BaselineBackend random(BaselineStrategy::kUniformRandom, 31337);
  const double r = accuracy(random);
  check.Expect(a == 0.0, "always-A " + Num(a, 2) + "%");
  check.Expect(o == 100.0, "oracle " + Num(o, 2) + "%");
  check.Expect(r >= 20.0 && r <= 30.0, "uniform-random " + Num(r, 2) + "%");
  return check.Done("always-A " + Num(a, 1) + "%, oracle " + Num(o, 1) + "%, uniform-random " +
                    Num(r, 2) + "% over " + std::to_string(units) + " units");
}

}  // namespace
}  // namespace ideaforecast

int main() {
  using ideaforecast::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"degenerate ranking RMSE", ideaforecast::DegenerateRmse},
      {"reward enumeration", ideaforecast::RewardEnumeration},
      {"dataset balance and closure", ideaforecast::DatasetBalance},
      {"discordance removal contract", ideaforecast::PruneContract},
      {"consistency metric oracle", ideaforecast::ConsistencyOracle},
      {"calibration fixtures", ideaforecast::CalibrationFixtures},
      {"bootstrap null calibration", ideaforecast::BootstrapNull},
      {"pipeline determinism", ideaforecast::PipelineDeterminism},
      {"baseline sanity", ideaforecast::BaselineSanity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!outcome.pass) ++failures;
    std::printf("%s  [%zu] %-30s %7.2fs  %s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), seconds, outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
