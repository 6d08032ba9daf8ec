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

#include "ideaforecast/cli.h"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "ideaforecast/calibration.h"
#include "ideaforecast/evaluation.h"
#include "ideaforecast/ingest.h"
#include "ideaforecast/random.h"
#include "ideaforecast/ranking.h"
#include "ideaforecast/scoring.h"

namespace ideaforecast {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// Raised for invalid flag combinations or missing required paths.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

int ReportError(std::ostream& err, int code, const std::string& message) {
  err << ordered_json{{"error", message}, {"exit_code", code}}.dump() << '\n';
  return code;
}

// Runs a command body and maps exceptions onto exit codes.
int Guard(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    return ReportError(err, kExitUsage, e.what());
  } catch (const BackendError& e) {
    return ReportError(err, kExitBackendFailure, e.what());
  } catch (const DataError& e) {
    return ReportError(err, kExitDataError, e.what());
  } catch (const DomainError& e) {
    return ReportError(err, kExitDataError, e.what());
  } catch (const std::exception& e) {
    return ReportError(err, kExitDataError, e.what());
  }
}

void Require(const fs::path& path, const char* flag) {
  if (path.empty()) throw UsageError(std::string("missing required ") + flag);
}

fs::path OutputDir(const RunConfig& config) {
  Require(config.output, "--out");
  fs::create_directories(config.output);
  return config.output;
}

template <typename Json>
void WriteJson(const fs::path& path, const Json& document) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << document.dump(2) << '\n';
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string Fixed(double value, int digits = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << value;
  return s.str();
}

std::string OptionalFixed(const std::optional<double>& value, int digits = 2) {
  return value ? Fixed(*value, digits) : "-";
}

// Minimal aligned text table.
class Table {
 public:
  explicit Table(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void Add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  std::string Render() const {
    std::vector<std::size_t> widths;
    for (const auto& row : rows_) {
      widths.resize(std::max(widths.size(), row.size()), 0);
      for (std::size_t c = 0; c < row.size(); ++c) {
        widths[c] = std::max(widths[c], row[c].size());
      }
    }
    std::ostringstream out;
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      for (std::size_t c = 0; c < rows_[r].size(); ++c) {
        out << (c == 0 ? "" : "  ") << std::left << std::setw(static_cast<int>(widths[c]))
            << rows_[r][c];
      }
      out << '\n';
      if (r == 0) {
        std::size_t total = 0;
        for (const auto w : widths) total += w + 2;
        out << std::string(total > 2 ? total - 2 : 0, '-') << '\n';
      }
    }
    return out.str();
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

template <typename T>
T Get(const json& object, const char* key, const char* section) {
  try {
    return object.at(key).get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("config: bad value for ") + section + "." + key);
  }
}

void CheckKeys(const json& object, const std::set<std::string>& allowed, const char* section) {
  if (!object.is_object()) throw DataError(std::string("config: ") + section + " must be an object");
  for (const auto& [key, value] : object.items()) {
    if (!allowed.count(key)) {
      throw DataError(std::string("config: unknown key ") + section + "." + key);
    }
  }
}

std::unique_ptr<Backend> MakeBackend(const RunConfig& config) {
  const std::string& spec = config.backend;
  if (spec.rfind("replay:", 0) == 0) {
    return ReplayBackend::FromFile(spec.substr(7));
  }
  if (spec.rfind("baseline:", 0) == 0) {
    const auto strategy = ParseBaselineStrategy(spec.substr(9));
    if (!strategy) throw UsageError("unknown baseline strategy " + spec.substr(9));
    return std::make_unique<BaselineBackend>(*strategy, config.seed);
  }
  if (spec == "remote") {
    if (config.remote.endpoint.empty() || config.remote.model.empty()) {
      throw UsageError("remote backend needs --endpoint and --model");
    }
    RemoteConfig remote = config.remote;
    if (remote.api_key.empty()) {
      if (const char* key = std::getenv(kApiKeyEnv)) remote.api_key = key;
    }
    try {
      return std::make_unique<RemoteChatBackend>(std::move(remote));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  throw UsageError("--backend must be replay:<file>, baseline:<strategy> or remote");
}

std::string TierLabel(SigmaTier tier) {
  return tier == SigmaTier::kNone ? "unstratified" : TierName(tier) + "-sigma";
}

}  // namespace

void ApplyConfigJson(const json& document, RunConfig& config) {
  CheckKeys(document,
            {"seed", "input_dir", "dataset", "predictions", "output", "sigma_windows", "reward",
             "backend", "bootstrap", "calibration", "paraphrase", "comparison_matrix"},
            "root");
  if (document.contains("seed")) config.seed = Get<std::uint64_t>(document, "seed", "root");
  if (document.contains("input_dir")) {
    config.input_dir = Get<std::string>(document, "input_dir", "root");
  }
  if (document.contains("dataset")) config.dataset = Get<std::string>(document, "dataset", "root");
  if (document.contains("predictions")) {
    config.predictions = Get<std::string>(document, "predictions", "root");
  }
  if (document.contains("output")) config.output = Get<std::string>(document, "output", "root");
  if (document.contains("comparison_matrix")) {
    config.comparison_matrix = Get<bool>(document, "comparison_matrix", "root");
  }
  if (document.contains("sigma_windows")) {
    const auto windows =
        Get<std::vector<std::array<double, 2>>>(document, "sigma_windows", "root");
    if (windows.size() != 3) throw DataError("config: sigma_windows needs three windows");
    for (std::size_t i = 0; i < 3; ++i) {
      config.sigma_windows.windows[i] = {windows[i][0], windows[i][1]};
    }
    try {
      config.sigma_windows.Check();
    } catch (const DomainError& e) {
      throw DataError(std::string("config: ") + e.what());
    }
  }
  if (document.contains("reward")) {
    const json& reward = document["reward"];
    CheckKeys(reward, {"length_penalty", "penalty_magnitude", "min_chars", "advantage_mode"},
              "reward");
    if (reward.contains("length_penalty")) {
      config.penalty.enabled = Get<bool>(reward, "length_penalty", "reward");
    }
    if (reward.contains("penalty_magnitude")) {
      config.penalty.magnitude = Get<double>(reward, "penalty_magnitude", "reward");
      if (config.penalty.magnitude < 0) {
        throw DataError("config: reward.penalty_magnitude must be nonnegative");
      }
    }
    if (reward.contains("min_chars")) {
      config.penalty.min_chars = Get<std::int64_t>(reward, "min_chars", "reward");
    }
    if (reward.contains("advantage_mode")) {
      const auto mode = Get<std::string>(reward, "advantage_mode", "reward");
      if (mode == "centered-only") {
        config.advantage_mode = AdvantageMode::kCenteredOnly;
      } else if (mode == "centered-scaled") {
        config.advantage_mode = AdvantageMode::kCenteredScaled;
      } else {
        throw DataError("config: reward.advantage_mode must be centered-only or centered-scaled");
      }
    }
  }
  if (document.contains("backend")) {
    const json& backend = document["backend"];
    CheckKeys(backend,
              {"spec", "endpoint", "model", "concurrency", "cache_dir", "max_attempts",
               "initial_delay_ms", "max_delay_ms", "timeout_seconds", "logprobs", "max_tokens",
               "temperature"},
              "backend");
    if (backend.contains("spec")) config.backend = Get<std::string>(backend, "spec", "backend");
    if (backend.contains("endpoint")) {
      config.remote.endpoint = Get<std::string>(backend, "endpoint", "backend");
    }
    if (backend.contains("model")) config.remote.model = Get<std::string>(backend, "model", "backend");
    if (backend.contains("concurrency")) {
      config.concurrency = Get<int>(backend, "concurrency", "backend");
    }
    if (backend.contains("cache_dir")) {
      config.cache_dir = Get<std::string>(backend, "cache_dir", "backend");
    }
    if (backend.contains("max_attempts")) {
      config.retry.max_attempts = Get<int>(backend, "max_attempts", "backend");
    }
    if (backend.contains("initial_delay_ms")) {
      config.retry.initial_delay =
          std::chrono::milliseconds(Get<std::int64_t>(backend, "initial_delay_ms", "backend"));
    }
    if (backend.contains("max_delay_ms")) {
      config.retry.max_delay =
          std::chrono::milliseconds(Get<std::int64_t>(backend, "max_delay_ms", "backend"));
    }
    if (backend.contains("timeout_seconds")) {
      config.remote.timeout_seconds = Get<int>(backend, "timeout_seconds", "backend");
    }
    if (backend.contains("logprobs")) {
      config.remote.request_logprobs = Get<bool>(backend, "logprobs", "backend");
    }
    if (backend.contains("max_tokens")) {
      config.remote.max_tokens = Get<int>(backend, "max_tokens", "backend");
    }
    if (backend.contains("temperature")) {
      config.remote.temperature = Get<double>(backend, "temperature", "backend");
    }
  }
  if (document.contains("bootstrap")) {
    const json& bootstrap = document["bootstrap"];
    CheckKeys(bootstrap, {"resamples", "seed"}, "bootstrap");
    if (bootstrap.contains("resamples")) {
      config.bootstrap_resamples = Get<int>(bootstrap, "resamples", "bootstrap");
    }
    if (bootstrap.contains("seed")) {
      config.bootstrap_seed = Get<std::uint64_t>(bootstrap, "seed", "bootstrap");
    }
  }
  if (document.contains("calibration")) {
    const json& calibration = document["calibration"];
    CheckKeys(calibration, {"bins", "debiased"}, "calibration");
    if (calibration.contains("bins")) config.bin_count = Get<int>(calibration, "bins", "calibration");
    if (calibration.contains("debiased")) {
      config.debiased = Get<bool>(calibration, "debiased", "calibration");
    }
  }
  if (document.contains("paraphrase")) {
    const json& paraphrase = document["paraphrase"];
    CheckKeys(paraphrase, {"dataset", "predictions"}, "paraphrase");
    if (paraphrase.contains("dataset")) {
      config.paraphrase_dataset = Get<std::string>(paraphrase, "dataset", "paraphrase");
    }
    if (paraphrase.contains("predictions")) {
      config.paraphrase_predictions = Get<std::string>(paraphrase, "predictions", "paraphrase");
    }
  }
}

RunConfig LoadConfigFile(const fs::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read config " + path.string());
  const json document = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (document.is_discarded()) throw DataError("config is not valid JSON: " + path.string());
  ApplyConfigJson(document, base);
  return base;
}

// ---------------------------------------------------------------------------
// build-dataset
// ---------------------------------------------------------------------------

int CommandBuildDataset(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return Guard(err, [&]() -> int {
    Require(config.input_dir, "--input");
    config.sigma_windows.Check();
    const ParseResult parsed = ParseCorpus(config.input_dir);
    const fs::path dir = OutputDir(config);
    const Corpus& corpus = parsed.corpus;

    ordered_json scoring_reports = ordered_json::array();
    ordered_json pairing = ordered_json::array();
    std::vector<ScoredLeaderboard> candidates;
    auto note = [&](const std::string& benchmark, const std::string& status,
                    const std::string& reason) {
      pairing.push_back({{"benchmark_id", benchmark}, {"status", status}, {"reason", reason}});
      out << "skipped " << benchmark << ": " << reason << '\n';
    };

    for (const Leaderboard& board : corpus.leaderboards) {
      if (board.entries.size() < 2) {
        note(board.benchmark_id, "skipped", "fewer than 2 entries");
        continue;
      }
      const ScoringResult scoring = ComputeUnifiedScores(board);
      if (scoring.skip_reason) {
        scoring_reports.push_back(ordered_json(ToJson(scoring, nullptr)));
        note(board.benchmark_id, "skipped", *scoring.skip_reason);
        continue;
      }
      const PruneResult prune = PruneDiscordant(scoring.scores);
      scoring_reports.push_back(ordered_json(ToJson(scoring, &prune)));
      ScoredLeaderboard scored = BuildScoredLeaderboard(board, prune.kept, corpus);
      if (!scored.HasResearchGoal()) {
        note(board.benchmark_id, "removed", "no research goal");
        continue;
      }
      candidates.push_back(std::move(scored));
    }

    const SplitResult split = BucketAndSplit(candidates, config.seed);
    std::vector<IdeaPair> train, test, ranking;
    std::map<std::string, std::map<std::string, int>> tier_counts;
    Table table({"benchmark", "ideas", "sigma", "train pairs", "test pairs", "status"});
    for (const ScoredLeaderboard& board : candidates) {
      PairGenerationOptions options;
      options.windows = config.sigma_windows;
      auto train_pairs = GeneratePairs(board, split.assignment, SplitSide::kTrain, options);
      auto test_pairs = GeneratePairs(board, split.assignment, SplitSide::kTest, options);
      if (train_pairs.skip_reason) {
        note(board.benchmark_id, "skipped", *train_pairs.skip_reason);
        table.Add({board.benchmark_id, std::to_string(board.pool.size()), Fixed(board.sigma, 4),
                   "0", "0", *train_pairs.skip_reason});
        continue;
      }
      options.require_window = false;
      auto ranking_pairs = GeneratePairs(board, split.assignment, SplitSide::kTest, options);
      std::set<std::string> ranking_ideas;
      for (const auto& p : ranking_pairs.pairs) ranking_ideas.insert(*p.idea_a_id);
      for (const auto& p : ranking_pairs.pairs) ranking_ideas.insert(*p.idea_b_id);
      if (ranking_ideas.size() >= static_cast<std::size_t>(kMinRankingIdeas)) {
        ranking.insert(ranking.end(), ranking_pairs.pairs.begin(), ranking_pairs.pairs.end());
      }
      for (const auto& p : train_pairs.pairs) ++tier_counts["train"][TierName(p.sigma_tier)];
      for (const auto& p : test_pairs.pairs) ++tier_counts["test"][TierName(p.sigma_tier)];
      pairing.push_back({{"benchmark_id", board.benchmark_id},
                         {"status", "paired"},
                         {"sigma", board.sigma},
                         {"train_pairs", train_pairs.pairs.size()},
                         {"test_pairs", test_pairs.pairs.size()}});
      table.Add({board.benchmark_id, std::to_string(board.pool.size()), Fixed(board.sigma, 4),
                 std::to_string(train_pairs.pairs.size()), std::to_string(test_pairs.pairs.size()),
                 "paired"});
      train.insert(train.end(), train_pairs.pairs.begin(), train_pairs.pairs.end());
      test.insert(test.end(), test_pairs.pairs.begin(), test_pairs.pairs.end());
    }

    auto write_pairs = [&](const fs::path& path, std::vector<IdeaPair> pairs) {
      std::ofstream file(path, std::ios::trunc);
      if (!file) throw DataError("cannot write " + path.string());
      if (path.filename() != "ranking_pairs.jsonl") {
        for (auto& p : pairs) {
          p.idea_a_id.reset();
          p.idea_b_id.reset();
        }
      }
      WritePairs(pairs, file);
    };
    write_pairs(dir / "train.jsonl", train);
    write_pairs(dir / "test.jsonl", test);
    write_pairs(dir / "ranking_pairs.jsonl", ranking);
    {
      std::ofstream manifest(dir / "split_manifest.jsonl", std::ios::trunc);
      WriteManifest(split.assignment, manifest);
      std::ofstream rejections(dir / "rejections.jsonl", std::ios::trunc);
      for (const auto& r : parsed.rejections) rejections << ToJson(r).dump() << '\n';
    }

    ordered_json report = {
        {"input",
         {{"records", parsed.input_records},
          {"accepted", parsed.accepted_records},
          {"rejected", parsed.rejected_records},
          {"entry_rejections",
           std::count_if(parsed.rejections.begin(), parsed.rejections.end(),
                         [](const Rejection& r) { return r.entry_id.has_value(); })},
          {"leaderboards", corpus.leaderboards.size()},
          {"ideas", corpus.ideas.size()}}},
        {"seed", config.seed},
        {"validation", ToJson(Validate(corpus))},
        {"scoring", scoring_reports},
        {"split", ToJson(split)},
        {"pairing", pairing},
        {"pairs",
         {{"train", train.size()},
          {"test", test.size()},
          {"ranking", ranking.size()},
          {"tiers", tier_counts}}}};
    WriteJson(dir / "build_report.json", report);
    WriteText(dir / "build_report.txt", table.Render());
    out << table.Render();
    out << "wrote " << train.size() << " train / " << test.size() << " test / " << ranking.size()
        << " ranking pairs to " << dir.string() << '\n';
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

int CommandPredict(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return Guard(err, [&]() -> int {
    Require(config.dataset, "--dataset");
    const std::vector<IdeaPair> pairs = ReadPairs(config.dataset);
    IndexPairs(pairs);
    auto backend = MakeBackend(config);
    std::unique_ptr<ResponseCache> cache;
    if (!config.cache_dir.empty()) cache = std::make_unique<ResponseCache>(config.cache_dir);
    RunOptions options;
    options.concurrency_limit = config.concurrency;
    options.retry = config.retry;
    options.cache = cache.get();
    const std::vector<Prediction> predictions = RunPredictions(pairs, *backend, options);
    const fs::path dir = OutputDir(config);
    {
      std::ofstream file(dir / "predictions.jsonl", std::ios::trunc);
      WritePredictions(predictions, file);
    }
    std::vector<std::string> failed;
    for (const auto& p : predictions) {
      if (p.failure) failed.push_back(p.pair_id);
    }
    out << "wrote " << predictions.size() << " predictions from " << backend->Id() << " to "
        << (dir / "predictions.jsonl").string() << '\n';
    if (!failed.empty()) {
      std::string message = std::to_string(failed.size()) + " predictions failed:";
      for (const auto& id : failed) message += " " + id;
      return ReportError(err, kExitBackendFailure, message);
    }
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

int CommandEvaluate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return Guard(err, [&]() -> int {
    Require(config.dataset, "--dataset");
    Require(config.predictions, "--predictions");
    if (config.bootstrap_resamples < 1) throw UsageError("--bootstrap-resamples must be >= 1");
    const std::vector<IdeaPair> pairs = ReadPairs(config.dataset);
    const std::vector<Prediction> predictions = ReadPredictions(config.predictions);
    const std::vector<PairVerdict> verdicts = JudgePairs(predictions, pairs);
    const EvalReport report = Evaluate(verdicts, pairs);

    std::vector<SubsetDelta> deltas;
    for (const auto dimension : {SubsetDimension::kLength, SubsetDimension::kRecency}) {
      deltas.push_back(SubsetDeltas(verdicts, pairs, dimension));
    }
    if (!config.paraphrase_dataset.empty() || !config.paraphrase_predictions.empty()) {
      Require(config.paraphrase_dataset, "--paraphrase-dataset");
      Require(config.paraphrase_predictions, "--paraphrase-predictions");
      const auto para_pairs = ReadPairs(config.paraphrase_dataset);
      const auto para_predictions = ReadPredictions(config.paraphrase_predictions);
      const auto para_verdicts = JudgePairs(para_predictions, para_pairs);
      deltas.push_back(ParaphraseDelta(verdicts, para_verdicts));
      SubsetDelta& paraphrase = deltas.back();
      if (!paraphrase.ids_a.empty()) {
        paraphrase.bootstrap = PairedBootstrapTest(
            para_verdicts, verdicts, paraphrase.ids_a, config.bootstrap_resamples,
            DeriveSeed(config.bootstrap_seed, DimensionName(paraphrase.dimension)));
      }
    }
    for (SubsetDelta& delta : deltas) {
      if (delta.dimension == SubsetDimension::kParaphrase) continue;
      if (delta.ids_a.empty() || delta.ids_b.empty()) continue;
      delta.bootstrap = BootstrapTest(verdicts, delta.ids_a, delta.ids_b,
                                      config.bootstrap_resamples,
                                      DeriveSeed(config.bootstrap_seed, DimensionName(delta.dimension)));
    }

    const fs::path dir = OutputDir(config);
    ordered_json subsets = ordered_json::array();
    for (const auto& d : deltas) subsets.push_back(ToJson(d));
    WriteJson(dir / "evaluation.json", ordered_json{{"report", ToJson(report)},
                                                    {"subset_deltas", subsets}});
    {
      std::ofstream file(dir / "verdicts.jsonl", std::ios::trunc);
      for (const auto& v : verdicts) file << ToJson(v).dump() << '\n';
    }

    Table tiers({"subset", "units", "consistent", "correct", "accuracy %"});
    for (const auto& [tier, stats] : report.per_tier) {
      tiers.Add({TierLabel(tier), std::to_string(stats.units), std::to_string(stats.consistent),
                 std::to_string(stats.correct), Fixed(stats.accuracy)});
    }
    tiers.Add({"overall", std::to_string(report.units), std::to_string(report.consistent),
               std::to_string(report.correct), Fixed(report.overall_accuracy)});
    Table subset_table({"dimension", "subset A", "acc A %", "subset B", "acc B %", "delta pp",
                        "95% CI", "p", ""});
    for (const auto& d : deltas) {
      std::string ci = "-", p = "-", marker;
      if (d.bootstrap) {
        ci = "[" + Fixed(d.bootstrap->ci_low) + ", " + Fixed(d.bootstrap->ci_high) + "]";
        p = Fixed(d.bootstrap->p_value, 4);
        marker = SignificanceMarker(d.bootstrap->p_value);
      }
      subset_table.Add({DimensionName(d.dimension),
                        d.name_a + " (" + std::to_string(d.ids_a.size()) + ")",
                        OptionalFixed(d.accuracy_a),
                        d.name_b + " (" + std::to_string(d.ids_b.size()) + ")",
                        OptionalFixed(d.accuracy_b), OptionalFixed(d.delta_pp), ci, p, marker});
    }
    std::ostringstream text;
    text << tiers.Render() << '\n'
         << "consistency rate %:     " << Fixed(report.consistency_rate) << '\n'
         << "conditional accuracy %: " << OptionalFixed(report.conditional_accuracy) << "\n\n"
         << subset_table.Render();
    WriteText(dir / "evaluation.txt", text.str());
    out << text.str();
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

int CommandCalibrate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return Guard(err, [&]() -> int {
    Require(config.dataset, "--dataset");
    Require(config.predictions, "--predictions");
    if (config.bin_count < 1) throw UsageError("--bins must be >= 1");
    const auto pairs = ReadPairs(config.dataset);
    const auto predictions = ReadPredictions(config.predictions);
    const CalibrationReport report =
        BuildCalibrationReport(predictions, pairs, config.bin_count, config.debiased);
    const fs::path dir = OutputDir(config);
    WriteJson(dir / "calibration.json", ToJson(report));
    Table bins({"bin", "count", "confidence", "accuracy"});
    for (const auto& bin : report.bins) {
      bins.Add({"[" + Fixed(bin.lower) + ", " + Fixed(bin.upper) + ")", std::to_string(bin.count),
                bin.count ? Fixed(bin.mean_confidence, 4) : "-",
                bin.count ? Fixed(bin.accuracy, 4) : "-"});
    }
    std::ostringstream text;
    text << (report.debiased ? "debiased" : "raw") << " calibration over " << report.scored
         << " items (" << report.skipped_count << " skipped, " << report.rejected_count
         << " rejected)\n"
         << "Brier " << Fixed(report.brier, 4) << "  ECE " << Fixed(report.ece, 4) << "  MCE "
         << Fixed(report.mce, 4) << "\n\n"
         << bins.Render();
    WriteText(dir / "calibration.txt", text.str());
    out << text.str();
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// rank
// ---------------------------------------------------------------------------

int CommandRank(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return Guard(err, [&]() -> int {
    Require(config.dataset, "--pairs");
    Require(config.predictions, "--predictions");
    const auto pairs = ReadPairs(config.dataset);
    const auto predictions = ReadPredictions(config.predictions);
    const RankingReport report = RankFromPredictions(pairs, predictions);
    for (const auto& [benchmark, reason] : report.skipped) {
      out << "skipped " << benchmark << ": " << reason << '\n';
    }
    const fs::path dir = OutputDir(config);
    WriteJson(dir / "ranking.json", ToJson(report, config.comparison_matrix));
    Table table({"benchmark", "ideas", "dropped", "rmse", "top-1"});
    for (const auto& r : report.leaderboards) {
      table.Add({r.benchmark_id, std::to_string(r.predicted_ranks.size()),
                 std::to_string(r.dropped_comparisons) + "/" + std::to_string(r.total_comparisons),
                 Fixed(r.rmse, 4),
                 r.top1_hit ? (*r.top1_hit ? "hit" : "miss") : "ineligible"});
    }
    std::ostringstream text;
    text << table.Render() << '\n'
         << "consistency rate %: " << Fixed(report.consistency_rate) << '\n'
         << "top-1 accuracy %:   " << OptionalFixed(report.top1_accuracy) << " over "
         << report.eligible_top1 << " eligible\n"
         << "median RMSE:        " << OptionalFixed(report.median_rmse, 4) << '\n';
    WriteText(dir / "ranking.txt", text.str());
    out << text.str();
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// reward-score
// ---------------------------------------------------------------------------

int CommandRewardScore(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return Guard(err, [&]() -> int {
    Require(config.dataset, "--dataset");
    Require(config.predictions, "--responses");
    const auto pairs = ReadPairs(config.dataset);
    std::map<std::string, Label> labels;
    for (const auto& p : pairs) labels[p.pair_id] = p.label;

    std::ifstream in(config.predictions);
    if (!in) throw DataError("cannot read " + config.predictions.string());
    struct Scored {
      std::string pair_id;
      std::string group_id;
      RewardBreakdown reward;
    };
    std::vector<Scored> scored;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
      const std::string where = config.predictions.string() + ":" + std::to_string(line_no);
      if (!record.is_object() || !record.contains("pair_id") || !record["pair_id"].is_string()) {
        throw DataError(where + ": response record needs a string pair_id");
      }
      const std::string pair_id = record["pair_id"].get<std::string>();
      const auto label = labels.find(pair_id);
      if (label == labels.end()) throw DataError(where + ": unknown pair_id " + pair_id);
      std::string raw;
      if (record.contains("raw_text") && record["raw_text"].is_string()) {
        raw = record["raw_text"].get<std::string>();
      }
      std::string group = pair_id;
      if (record.contains("group_id") && record["group_id"].is_string()) {
        group = record["group_id"].get<std::string>();
      }
      scored.push_back(
          {pair_id, group, ScoreResponse(ParseResponse(std::move(raw)), label->second, config.penalty)});
    }

    const fs::path dir = OutputDir(config);
    std::map<std::string, std::vector<double>> groups;
    std::map<std::string, int> histogram;
    {
      std::ofstream file(dir / "rewards.jsonl", std::ios::trunc);
      for (const auto& s : scored) {
        file << ToJson(s.pair_id, s.reward).dump() << '\n';
        groups[s.group_id].push_back(s.reward.total);
        std::ostringstream key;
        key << s.reward.total;
        ++histogram[key.str()];
      }
    }
    int advantage_groups = 0;
    {
      std::ofstream file(dir / "advantages.jsonl", std::ios::trunc);
      for (const auto& [group, rewards] : groups) {
        if (rewards.size() < 2) continue;
        const AdvantageSet set = GroupAdvantages(rewards, config.advantage_mode);
        ++advantage_groups;
        file << ordered_json{{"group_id", group},
                             {"mode", AdvantageModeName(set.mode)},
                             {"rewards", set.group_rewards},
                             {"advantages", set.advantages}}
                    .dump()
             << '\n';
      }
    }
    WriteJson(dir / "reward_summary.json",
              ordered_json{{"responses", scored.size()},
                           {"groups_with_advantages", advantage_groups},
                           {"penalty", {{"enabled", config.penalty.enabled},
                                        {"min_chars", config.penalty.min_chars},
                                        {"magnitude", config.penalty.magnitude}}},
                           {"totals", histogram}});
    Table table({"total", "responses"});
    for (const auto& [total, count] : histogram) table.Add({total, std::to_string(count)});
    out << table.Render();
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pairwise idea-forecasting dataset builder and evaluator", "ideaforecast"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override it");

  // Flag values are applied on top of the config file only when given.
  std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> overrides;
  auto path_flag = [&](CLI::App* cmd, const std::string& name, const std::string& help,
                       fs::path RunConfig::*member) {
    auto value = std::make_shared<std::string>();
    overrides.emplace_back(cmd->add_option(name, *value, help),
                           [value, member](RunConfig& c) { c.*member = *value; });
  };
  auto seed_flag = [&](CLI::App* cmd) {
    auto value = std::make_shared<std::uint64_t>();
    overrides.emplace_back(cmd->add_option("--seed", *value, "random seed"),
                           [value](RunConfig& c) { c.seed = *value; });
  };

  auto* build = app.add_subcommand("build-dataset", "build the pairwise dataset from a corpus");
  path_flag(build, "--input", "corpus directory", &RunConfig::input_dir);
  path_flag(build, "--out", "output directory", &RunConfig::output);
  seed_flag(build);

  auto* predict = app.add_subcommand("predict", "obtain predictions for a pair file");
  path_flag(predict, "--dataset", "pair file", &RunConfig::dataset);
  path_flag(predict, "--out", "output directory", &RunConfig::output);
  path_flag(predict, "--cache-dir", "response cache directory", &RunConfig::cache_dir);
  seed_flag(predict);
  {
    auto backend = std::make_shared<std::string>();
    overrides.emplace_back(
        predict->add_option("--backend", *backend,
                            "replay:<file>, baseline:<always-A|uniform-random|length|recency> "
                            "or remote"),
        [backend](RunConfig& c) { c.backend = *backend; });
    auto endpoint = std::make_shared<std::string>();
    overrides.emplace_back(predict->add_option("--endpoint", *endpoint, "chat completions URL"),
                           [endpoint](RunConfig& c) { c.remote.endpoint = *endpoint; });
    auto model = std::make_shared<std::string>();
    overrides.emplace_back(predict->add_option("--model", *model, "remote model name"),
                           [model](RunConfig& c) { c.remote.model = *model; });
    auto concurrency = std::make_shared<int>();
    overrides.emplace_back(
        predict->add_option("--concurrency", *concurrency, "in-flight request limit")
            ->check(CLI::PositiveNumber),
        [concurrency](RunConfig& c) { c.concurrency = *concurrency; });
  }

  auto* evaluate = app.add_subcommand("evaluate", "consistency accuracy and bias tests");
  path_flag(evaluate, "--dataset", "pair file", &RunConfig::dataset);
  path_flag(evaluate, "--predictions", "prediction file", &RunConfig::predictions);
  path_flag(evaluate, "--out", "output directory", &RunConfig::output);
  path_flag(evaluate, "--paraphrase-dataset", "paraphrased pair file",
            &RunConfig::paraphrase_dataset);
  path_flag(evaluate, "--paraphrase-predictions", "predictions on the paraphrased pairs",
            &RunConfig::paraphrase_predictions);
  {
    auto resamples = std::make_shared<int>();
    overrides.emplace_back(
        evaluate->add_option("--bootstrap-resamples", *resamples, "bootstrap resamples")
            ->check(CLI::PositiveNumber),
        [resamples](RunConfig& c) { c.bootstrap_resamples = *resamples; });
    auto seed = std::make_shared<std::uint64_t>();
    overrides.emplace_back(evaluate->add_option("--bootstrap-seed", *seed, "bootstrap seed"),
                           [seed](RunConfig& c) { c.bootstrap_seed = *seed; });
  }

  auto* calibrate = app.add_subcommand("calibrate", "Brier, ECE and MCE");
  path_flag(calibrate, "--dataset", "pair file", &RunConfig::dataset);
  path_flag(calibrate, "--predictions", "prediction file", &RunConfig::predictions);
  path_flag(calibrate, "--out", "output directory", &RunConfig::output);
  {
    auto bins = std::make_shared<int>();
    overrides.emplace_back(
        calibrate->add_option("--bins", *bins, "number of confidence bins")
            ->check(CLI::PositiveNumber),
        [bins](RunConfig& c) { c.bin_count = *bins; });
    auto raw = std::make_shared<bool>(false);
    overrides.emplace_back(
        calibrate->add_flag("--raw", *raw, "score each prediction without debiasing"),
        [](RunConfig& c) { c.debiased = false; });
  }

  auto* rank = app.add_subcommand("rank", "rank ideas from pairwise predictions");
  path_flag(rank, "--pairs", "ranking pair file", &RunConfig::dataset);
  path_flag(rank, "--predictions", "prediction file", &RunConfig::predictions);
  path_flag(rank, "--out", "output directory", &RunConfig::output);
  {
    auto matrix = std::make_shared<bool>(false);
    overrides.emplace_back(rank->add_flag("--matrix", *matrix, "emit comparison matrices"),
                           [](RunConfig& c) { c.comparison_matrix = true; });
  }

  auto* reward = app.add_subcommand("reward-score", "score responses with the verifiable reward");
  path_flag(reward, "--dataset", "pair file", &RunConfig::dataset);
  path_flag(reward, "--responses", "response file {pair_id, raw_text, group_id?}",
            &RunConfig::predictions);
  path_flag(reward, "--out", "output directory", &RunConfig::output);
  {
    auto penalty = std::make_shared<bool>(false);
    overrides.emplace_back(
        reward->add_flag("--length-penalty", *penalty, "penalize short responses"),
        [](RunConfig& c) { c.penalty.enabled = true; });
    auto magnitude = std::make_shared<double>();
    overrides.emplace_back(
        reward->add_option("--penalty-magnitude", *magnitude, "short-response penalty")
            ->check(CLI::NonNegativeNumber),
        [magnitude](RunConfig& c) { c.penalty.magnitude = *magnitude; });
    auto mode = std::make_shared<std::string>();
    overrides.emplace_back(
        reward->add_option("--advantage-mode", *mode, "centered-only or centered-scaled")
            ->check(CLI::IsMember({"centered-only", "centered-scaled"})),
        [mode](RunConfig& c) {
          c.advantage_mode = *mode == "centered-scaled" ? AdvantageMode::kCenteredScaled
                                                        : AdvantageMode::kCenteredOnly;
        });
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return ReportError(err, kExitUsage, e.what());
  }

  RunConfig config;
  if (!config_path.empty()) {
    try {
      config = LoadConfigFile(config_path);
    } catch (const DataError& e) {
      return ReportError(err, kExitUsage, e.what());
    }
  }
  for (const auto& [option, apply] : overrides) {
    if (option->count() > 0) apply(config);
  }

  if (build->parsed()) return CommandBuildDataset(config, out, err);
  if (predict->parsed()) return CommandPredict(config, out, err);
  if (evaluate->parsed()) return CommandEvaluate(config, out, err);
  if (calibrate->parsed()) return CommandCalibrate(config, out, err);
  if (rank->parsed()) return CommandRank(config, out, err);
  if (reward->parsed()) return CommandRewardScore(config, out, err);
  return ReportError(err, kExitUsage, "no command given");
}

}  // namespace ideaforecast
