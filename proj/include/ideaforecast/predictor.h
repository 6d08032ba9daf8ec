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

// Prompting, response parsing and prediction backends.

#ifndef IDEAFORECAST_PREDICTOR_H_
#define IDEAFORECAST_PREDICTOR_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ideaforecast/dataset.h"
#include "json.hpp"

namespace ideaforecast {

// ---------------------------------------------------------------------------
// Prompt and response format
// ---------------------------------------------------------------------------

struct Prompt {
  std::string system;
  std::string user;
};

extern const char kSystemPrompt[];
extern const char kAnswerInstruction[];

Prompt BuildPrompt(const IdeaPair& pair);

struct ParsedResponse {
  std::string raw_text;
  bool think_present = false;
  std::optional<std::string> think_text;
  bool answer_tag_present = false;
  std::optional<Label> answer;
  std::int64_t char_length = 0;
};

// Think block: "<think>" followed later by "</think>". Answer: the last
// "Answer:" that is followed by 0 or 1, optionally bracketed ("Answer: [1]").
ParsedResponse ParseResponse(std::string raw_text);

// ---------------------------------------------------------------------------
// Predictions
// ---------------------------------------------------------------------------

struct Prediction {
  std::string pair_id;
  ParsedResponse parsed;
  // Probability that the answer is 1, when the backend exposes it.
  std::optional<double> class_probability;
  std::string backend_id;
  double latency_ms = 0.0;
  std::optional<std::string> failure;
};

struct BackendReply {
  std::string raw_text;
  std::optional<double> class_probability;
};

class BackendError : public std::runtime_error {
 public:
  BackendError(const std::string& message, bool retryable)
      : std::runtime_error(message), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string Id() const = 0;
  // Throws BackendError on failure. Must be safe to call concurrently.
  virtual BackendReply Complete(const IdeaPair& pair, const Prompt& prompt) = 0;
};

// Serves recorded responses keyed by pair_id.
class ReplayBackend : public Backend {
 public:
  ReplayBackend(std::string id, std::map<std::string, BackendReply> replies);
  // Reads newline-delimited {pair_id, raw_text, class_probability?}.
  static std::unique_ptr<ReplayBackend> FromFile(const std::filesystem::path& path);

  std::string Id() const override { return id_; }
  BackendReply Complete(const IdeaPair& pair, const Prompt& prompt) override;

 private:
  std::string id_;
  std::map<std::string, BackendReply> replies_;
};

enum class BaselineStrategy { kAlwaysA, kUniformRandom, kLength, kRecency };

std::optional<BaselineStrategy> ParseBaselineStrategy(const std::string& name);
std::string BaselineName(BaselineStrategy strategy);

// Pure function of the pair's metadata and `seed`. Length ties and recency
// ties answer 1; recency without both years yields no answer.
ParsedResponse BaselinePredict(const IdeaPair& pair, BaselineStrategy strategy,
                               std::uint64_t seed);

class BaselineBackend : public Backend {
 public:
  BaselineBackend(BaselineStrategy strategy, std::uint64_t seed)
      : strategy_(strategy), seed_(seed) {}
  std::string Id() const override { return "baseline-" + BaselineName(strategy_); }
  BackendReply Complete(const IdeaPair& pair, const Prompt& prompt) override;

 private:
  BaselineStrategy strategy_;
  std::uint64_t seed_;
};

struct RemoteConfig {
  // Full URL of a chat-completions endpoint,
  // e.g. "http://localhost:8000/v1/chat/completions".
  std::string endpoint;
  std::string model;
  // Sent as a bearer token when non-empty.
  std::string api_key;
  double temperature = 0.0;
  int max_tokens = 2048;
  // Ask for per-token log-probabilities to derive class probabilities.
  bool request_logprobs = true;
  int timeout_seconds = 120;
};

// Environment variable read by the CLI for the bearer token.
inline constexpr char kApiKeyEnv[] = "IDEAFORECAST_API_KEY";

// Chat-completion style HTTP backend (messages schema).
class RemoteChatBackend : public Backend {
 public:
  explicit RemoteChatBackend(RemoteConfig config);
  std::string Id() const override { return "remote-" + config_.model; }
  BackendReply Complete(const IdeaPair& pair, const Prompt& prompt) override;

  int calls() const { return calls_.load(); }

 private:
  RemoteConfig config_;
  std::string host_;
  std::string path_;
  std::atomic<int> calls_{0};
};

nlohmann::json ChatRequestBody(const RemoteConfig& config, const Prompt& prompt);
// Parses a chat-completion response body. Throws BackendError when the body
// has no message content.
BackendReply ParseChatResponse(const nlohmann::json& body);
// P(answer = 1) from a `choices[0].logprobs.content` token list, using the
// last token that reads as a 0/1 numeral.
std::optional<double> ClassProbabilityFromLogprobs(const nlohmann::json& content);

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

// On-disk response cache: <dir>/<key[0:2]>/<key>.json where key is the
// SHA-256 of backend id, pair id and prompt hash.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);
  std::optional<BackendReply> Load(const std::string& key) const;
  void Store(const std::string& key, const std::string& pair_id,
             const BackendReply& reply);

  static std::string Key(const std::string& backend_id, const std::string& pair_id,
                         const Prompt& prompt);

 private:
  std::filesystem::path Path(const std::string& key) const;
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
};

std::string Sha256Hex(std::string_view bytes);

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_delay{500};
  std::chrono::milliseconds max_delay{30000};
};

// Delay before retry `attempt` (1-based): initial * 2^(attempt-1), capped.
std::chrono::milliseconds BackoffDelay(const RetryPolicy& policy, int attempt);

struct RunOptions {
  int concurrency_limit = 4;
  RetryPolicy retry;
  ResponseCache* cache = nullptr;
  std::function<void(std::chrono::milliseconds)> sleep;
};

// One prediction per pair, sorted by pair_id. Failures after exhausted
// retries produce a prediction without an answer and a failure reason.
std::vector<Prediction> RunPredictions(std::span<const IdeaPair> pairs, Backend& backend,
                                       const RunOptions& options = {});

nlohmann::ordered_json ToJson(const Prediction& prediction);
Prediction PredictionFromJson(const nlohmann::json& record);
void WritePredictions(std::span<const Prediction> predictions, std::ostream& out);
// Accepts both full prediction files and replay files; the answer is always
// re-derived from raw_text.
std::vector<Prediction> ReadPredictions(const std::filesystem::path& path);
std::vector<Prediction> ReadPredictions(std::istream& in);

}  // namespace ideaforecast

#endif  // IDEAFORECAST_PREDICTOR_H_
