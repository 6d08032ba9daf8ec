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

#include "ideaforecast/predictor.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "ideaforecast/random.h"

namespace ideaforecast {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerTag = "Answer:";

bool IsBlank(char c) { return c == ' ' || c == '\t'; }

// Reads "[ws] ['['] [ws] (0|1) [ws] [']']" at `pos`. A numeral followed by
// another digit ("Answer: 10") does not count.
std::optional<Label> ReadAnswerAt(std::string_view text, std::size_t pos) {
  while (pos < text.size() && IsBlank(text[pos])) ++pos;
  if (pos < text.size() && text[pos] == '[') {
    ++pos;
    while (pos < text.size() && IsBlank(text[pos])) ++pos;
  }
  if (pos >= text.size() || (text[pos] != '0' && text[pos] != '1')) return std::nullopt;
  const char digit = text[pos];
  if (pos + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[pos + 1]))) {
    return std::nullopt;
  }
  return digit == '1' ? Label::kIdeaA : Label::kIdeaB;
}

// Numeral read from a token ("1", " 1", "[1", "1]"), if any.
std::optional<int> TokenNumeral(const std::string& token) {
  std::string core;
  for (const char c : token) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '[' || c == ']') continue;
    core.push_back(c);
  }
  if (core == "0") return 0;
  if (core == "1") return 1;
  return std::nullopt;
}

void SplitEndpoint(const std::string& endpoint, std::string* host, std::string* path) {
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos) {
    throw std::invalid_argument("endpoint must start with http:// or https://");
  }
  const auto slash = endpoint.find('/', scheme + 3);
  *host = endpoint.substr(0, slash);
  *path = slash == std::string::npos ? "/" : endpoint.substr(slash);
}

std::optional<double> OptionalProbability(const json& record) {
  const auto it = record.find("class_probability");
  if (it == record.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw DataError("class_probability must be a number or null");
  return it->get<double>();
}

}  // namespace

const char kSystemPrompt[] =
    "You are an expert AI research assistant. Evaluate two research ideas and "
    "determine which one is better.";

const char kAnswerInstruction[] =
    "Please reason step by step about which idea is better. Then provide your "
    "final answer in the format: \"Answer: [0 or 1]\" where 0 means Idea B is "
    "better and 1 means Idea A is better.";

Prompt BuildPrompt(const IdeaPair& pair) {
  Prompt prompt;
  prompt.system = kSystemPrompt;
  prompt.user = "Research Goal: " + pair.research_goal + "\n\n" + "Idea A: " +
                pair.idea_a + "\n\n" + "Idea B: " + pair.idea_b + "\n\n" +
                kAnswerInstruction;
  return prompt;
}

ParsedResponse ParseResponse(std::string raw_text) {
  ParsedResponse parsed;
  const std::string_view text(raw_text);
  const auto open = text.find(kThinkOpen);
  if (open != std::string_view::npos) {
    const auto body = open + kThinkOpen.size();
    const auto close = text.find(kThinkClose, body);
    if (close != std::string_view::npos) {
      parsed.think_present = true;
      parsed.think_text = std::string(text.substr(body, close - body));
    }
  }
  std::size_t pos = text.rfind(kAnswerTag);
  parsed.answer_tag_present = pos != std::string_view::npos;
  while (pos != std::string_view::npos) {
    if (auto answer = ReadAnswerAt(text, pos + kAnswerTag.size())) {
      parsed.answer = answer;
      break;
    }
    if (pos == 0) break;
    pos = text.rfind(kAnswerTag, pos - 1);
  }
  parsed.char_length = Utf8Length(text);
  parsed.raw_text = std::move(raw_text);
  return parsed;
}

ReplayBackend::ReplayBackend(std::string id, std::map<std::string, BackendReply> replies)
    : id_(std::move(id)), replies_(std::move(replies)) {}

std::unique_ptr<ReplayBackend> ReplayBackend::FromFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read replay file " + path.string());
  std::map<std::string, BackendReply> replies;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!record.is_object() || !record.contains("pair_id") ||
        !record["pair_id"].is_string()) {
      throw DataError(where + ": replay record needs a string pair_id");
    }
    BackendReply reply;
    const auto raw = record.find("raw_text");
    if (raw != record.end() && raw->is_string()) reply.raw_text = raw->get<std::string>();
    try {
      reply.class_probability = OptionalProbability(record);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    replies[record["pair_id"].get<std::string>()] = std::move(reply);
  }
  return std::make_unique<ReplayBackend>("replay-" + path.stem().string(),
                                         std::move(replies));
}

BackendReply ReplayBackend::Complete(const IdeaPair& pair, const Prompt&) {
  const auto it = replies_.find(pair.pair_id);
  if (it == replies_.end()) {
    throw BackendError("no replay response for " + pair.pair_id, /*retryable=*/false);
  }
  return it->second;
}

std::optional<BaselineStrategy> ParseBaselineStrategy(const std::string& name) {
  if (name == "always-A") return BaselineStrategy::kAlwaysA;
  if (name == "uniform-random") return BaselineStrategy::kUniformRandom;
  if (name == "length") return BaselineStrategy::kLength;
  if (name == "recency") return BaselineStrategy::kRecency;
  return std::nullopt;
}

std::string BaselineName(BaselineStrategy strategy) {
  switch (strategy) {
    case BaselineStrategy::kAlwaysA:
      return "always-A";
    case BaselineStrategy::kUniformRandom:
      return "uniform-random";
    case BaselineStrategy::kLength:
      return "length";
    case BaselineStrategy::kRecency:
      return "recency";
  }
  return "unknown";
}

ParsedResponse BaselinePredict(const IdeaPair& pair, BaselineStrategy strategy,
                               std::uint64_t seed) {
  std::optional<int> answer;
  switch (strategy) {
    case BaselineStrategy::kAlwaysA:
      answer = 1;
      break;
    case BaselineStrategy::kUniformRandom:
      answer = static_cast<int>(Rng(DeriveSeed(seed, pair.pair_id)).UniformIndex(2));
      break;
    case BaselineStrategy::kLength:
      answer = pair.meta.len_a >= pair.meta.len_b ? 1 : 0;
      break;
    case BaselineStrategy::kRecency:
      if (pair.meta.year_a && pair.meta.year_b) {
        answer = *pair.meta.year_a >= *pair.meta.year_b ? 1 : 0;
      }
      break;
  }
  return ParseResponse(answer ? "Answer: " + std::to_string(*answer) : std::string());
}

BackendReply BaselineBackend::Complete(const IdeaPair& pair, const Prompt&) {
  return {BaselinePredict(pair, strategy_, seed_).raw_text, std::nullopt};
}

RemoteChatBackend::RemoteChatBackend(RemoteConfig config) : config_(std::move(config)) {
  SplitEndpoint(config_.endpoint, &host_, &path_);
}

json ChatRequestBody(const RemoteConfig& config, const Prompt& prompt) {
  json body = {{"model", config.model},
               {"messages",
                json::array({{{"role", "system"}, {"content", prompt.system}},
                             {{"role", "user"}, {"content", prompt.user}}})},
               {"temperature", config.temperature},
               {"max_tokens", config.max_tokens}};
  if (config.request_logprobs) {
    body["logprobs"] = true;
    body["top_logprobs"] = 5;
  }
  return body;
}

std::optional<double> ClassProbabilityFromLogprobs(const json& content) {
  if (!content.is_array()) return std::nullopt;
  for (auto it = content.rbegin(); it != content.rend(); ++it) {
    if (!it->is_object() || !it->contains("token") || !(*it)["token"].is_string()) continue;
    const auto chosen = TokenNumeral((*it)["token"].get<std::string>());
    if (!chosen || !it->contains("logprob") || !(*it)["logprob"].is_number()) continue;
    std::optional<double> mass[2];
    mass[*chosen] = std::exp((*it)["logprob"].get<double>());
    const auto top = it->find("top_logprobs");
    if (top != it->end() && top->is_array()) {
      for (const json& alt : *top) {
        if (!alt.contains("token") || !alt["token"].is_string() || !alt.contains("logprob")) {
          continue;
        }
        const auto numeral = TokenNumeral(alt["token"].get<std::string>());
        if (numeral && *numeral != *chosen && !mass[*numeral]) {
          mass[*numeral] = std::exp(alt["logprob"].get<double>());
        }
      }
    }
    double p1;
    if (mass[0] && mass[1]) {
      p1 = *mass[1] / (*mass[0] + *mass[1]);
    } else {
      p1 = *chosen == 1 ? *mass[1] : 1.0 - *mass[0];
    }
    return std::clamp(p1, 0.0, 1.0);
  }
  return std::nullopt;
}

BackendReply ParseChatResponse(const json& body) {
  const auto choices = body.find("choices");
  if (choices == body.end() || !choices->is_array() || choices->empty()) {
    throw BackendError("response has no choices", /*retryable=*/true);
  }
  const json& choice = (*choices)[0];
  if (!choice.contains("message") || !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string()) {
    throw BackendError("response has no message content", /*retryable=*/true);
  }
  BackendReply reply;
  reply.raw_text = choice["message"]["content"].get<std::string>();
  if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
      choice["logprobs"].contains("content")) {
    reply.class_probability = ClassProbabilityFromLogprobs(choice["logprobs"]["content"]);
  }
  return reply;
}

BackendReply RemoteChatBackend::Complete(const IdeaPair&, const Prompt& prompt) {
  ++calls_;
  httplib::Client client(host_);
  client.set_connection_timeout(config_.timeout_seconds);
  client.set_read_timeout(config_.timeout_seconds);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  const auto result = client.Post(path_, headers, ChatRequestBody(config_, prompt).dump(),
                                   "application/json");
  if (!result) {
    throw BackendError("request failed: " + httplib::to_string(result.error()),
                       /*retryable=*/true);
  }
  if (result->status != 200) {
    const bool retryable = result->status == 408 || result->status == 429 ||
                           result->status >= 500;
    throw BackendError("HTTP " + std::to_string(result->status), retryable);
  }
  const json body = json::parse(result->body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded()) throw BackendError("response is not JSON", /*retryable=*/true);
  return ParseChatResponse(body);
}

std::string Sha256Hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string ResponseCache::Key(const std::string& backend_id, const std::string& pair_id,
                               const Prompt& prompt) {
  const std::string prompt_hash = Sha256Hex(prompt.system + '\0' + prompt.user);
  return Sha256Hex(backend_id + '\0' + pair_id + '\0' + prompt_hash);
}

std::filesystem::path ResponseCache::Path(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<BackendReply> ResponseCache::Load(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::ifstream in(Path(key));
  if (!in) return std::nullopt;
  const json record = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (!record.is_object() || !record.contains("raw_text") ||
      !record["raw_text"].is_string()) {
    return std::nullopt;
  }
  BackendReply reply{record["raw_text"].get<std::string>(), std::nullopt};
  if (record.contains("class_probability") && record["class_probability"].is_number()) {
    reply.class_probability = record["class_probability"].get<double>();
  }
  return reply;
}

void ResponseCache::Store(const std::string& key, const std::string& pair_id,
                          const BackendReply& reply) {
  std::lock_guard<std::mutex> lock(mutex_);
  const auto path = Path(key);
  std::filesystem::create_directories(path.parent_path());
  ordered_json record = {{"pair_id", pair_id}, {"raw_text", reply.raw_text}};
  record["class_probability"] =
      reply.class_probability ? ordered_json(*reply.class_probability) : ordered_json(nullptr);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << record.dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

std::chrono::milliseconds BackoffDelay(const RetryPolicy& policy, int attempt) {
  auto delay = policy.initial_delay;
  for (int i = 1; i < attempt && delay < policy.max_delay; ++i) delay *= 2;
  return std::min(delay, policy.max_delay);
}

std::vector<Prediction> RunPredictions(std::span<const IdeaPair> pairs, Backend& backend,
                                       const RunOptions& options) {
  std::vector<Prediction> results(pairs.size());
  const std::string backend_id = backend.Id();
  auto sleep = options.sleep ? options.sleep
                             : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

  auto predict_one = [&](std::size_t index) {
    const IdeaPair& pair = pairs[index];
    const Prompt prompt = BuildPrompt(pair);
    Prediction& out = results[index];
    out.pair_id = pair.pair_id;
    out.backend_id = backend_id;
    const auto start = std::chrono::steady_clock::now();
    std::optional<BackendReply> reply;
    std::string key;
    if (options.cache != nullptr) {
      key = ResponseCache::Key(backend_id, pair.pair_id, prompt);
      reply = options.cache->Load(key);
    }
    for (int attempt = 1; !reply; ++attempt) {
      try {
        reply = backend.Complete(pair, prompt);
        if (options.cache != nullptr) options.cache->Store(key, pair.pair_id, *reply);
      } catch (const BackendError& e) {
        if (!e.retryable() || attempt >= options.retry.max_attempts) {
          out.failure = std::string(e.what()) + " (after " + std::to_string(attempt) +
                        (attempt == 1 ? " attempt)" : " attempts)");
          break;
        }
        sleep(BackoffDelay(options.retry, attempt));
      }
    }
    out.parsed = ParseResponse(reply ? reply->raw_text : std::string());
    if (reply) out.class_probability = reply->class_probability;
    out.latency_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();
  };

  const std::size_t workers = std::min<std::size_t>(
      pairs.size(), static_cast<std::size_t>(std::max(1, options.concurrency_limit)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) predict_one(i);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  std::sort(results.begin(), results.end(),
            [](const Prediction& a, const Prediction& b) { return a.pair_id < b.pair_id; });
  return results;
}

nlohmann::ordered_json ToJson(const Prediction& prediction) {
  const auto& parsed = prediction.parsed;
  ordered_json out = {
      {"pair_id", prediction.pair_id},
      {"backend_id", prediction.backend_id},
      {"raw_text", parsed.raw_text},
      {"class_probability", prediction.class_probability
                                ? ordered_json(*prediction.class_probability)
                                : ordered_json(nullptr)},
      {"answer", parsed.answer ? ordered_json(ToInt(*parsed.answer)) : ordered_json(nullptr)},
      {"think_present", parsed.think_present},
      {"answer_tag_present", parsed.answer_tag_present},
      {"char_length", parsed.char_length},
      {"latency_ms", prediction.latency_ms}};
  if (prediction.failure) out["failure"] = *prediction.failure;
  return out;
}

Prediction PredictionFromJson(const json& record) {
  if (!record.is_object() || !record.contains("pair_id") || !record["pair_id"].is_string()) {
    throw DataError("prediction record needs a string pair_id");
  }
  Prediction prediction;
  prediction.pair_id = record["pair_id"].get<std::string>();
  std::string raw;
  if (record.contains("raw_text") && record["raw_text"].is_string()) {
    raw = record["raw_text"].get<std::string>();
  }
  prediction.parsed = ParseResponse(std::move(raw));
  prediction.class_probability = OptionalProbability(record);
  prediction.backend_id = record.value("backend_id", std::string("replay"));
  if (record.contains("latency_ms") && record["latency_ms"].is_number()) {
    prediction.latency_ms = record["latency_ms"].get<double>();
  }
  if (record.contains("failure") && record["failure"].is_string()) {
    prediction.failure = record["failure"].get<std::string>();
  }
  return prediction;
}

void WritePredictions(std::span<const Prediction> predictions, std::ostream& out) {
  for (const Prediction& p : predictions) out << ToJson(p).dump() << '\n';
}

std::vector<Prediction> ReadPredictions(std::istream& in) {
  std::vector<Prediction> predictions;
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
      predictions.push_back(PredictionFromJson(record));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return predictions;
}

std::vector<Prediction> ReadPredictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return ReadPredictions(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace ideaforecast
