#include "tgen/providers.hpp"

#include <cstdlib>

#include <httplib.h>

#include "tgen/error.hpp"

namespace tgen::llm {

ReplayProvider::ReplayProvider(const std::filesystem::path& transcript_path)
    : ReplayProvider(load_transcript(transcript_path)) {}

ReplayProvider::ReplayProvider(const Transcript& transcript)
    : meta_(transcript.meta) {
  for (const TranscriptEntry& entry : transcript.entries) {
    responses_.emplace(entry.digest, entry.response);  // first occurrence wins
  }
}

std::string ReplayProvider::complete(const CompletionRequest& request) {
  const std::string digest = request_digest(request);
  auto it = responses_.find(digest);
  if (it == responses_.end()) {
    throw Error(ErrorKind::replay_miss,
                "no transcript entry for digest " + digest + " (tag '" +
                    request.tag + "')");
  }
  return it->second;
}

ScriptedProvider::ScriptedProvider(std::vector<std::string> responses) {
  for (std::string& r : responses) {
    queue_.push_back(Entry{std::move(r), std::nullopt});
  }
}

ScriptedProvider& ScriptedProvider::enqueue(std::string response,
                                            std::optional<std::string> expect_tag) {
  std::lock_guard<std::mutex> lock(mu_);
  queue_.push_back(Entry{std::move(response), std::move(expect_tag)});
  return *this;
}

std::string ScriptedProvider::complete(const CompletionRequest& request) {
  std::lock_guard<std::mutex> lock(mu_);
  seen_.push_back(request);
  if (queue_.empty()) {
    throw Error(ErrorKind::provider_error,
                "scripted provider exhausted (tag '" + request.tag + "')");
  }
  Entry entry = std::move(queue_.front());
  queue_.pop_front();
  if (entry.expect_tag && *entry.expect_tag != request.tag) {
    throw Error(ErrorKind::provider_error,
                "scripted provider expected tag '" + *entry.expect_tag +
                    "', got '" + request.tag + "'");
  }
  return entry.response;
}

std::size_t ScriptedProvider::remaining() const {
  std::lock_guard<std::mutex> lock(mu_);
  return queue_.size();
}

std::optional<LiveConfig> live_config_from_env() {
  const char* endpoint = std::getenv("TGEN_LLM_ENDPOINT");
  const char* model = std::getenv("TGEN_LLM_MODEL");
  if (!endpoint || !model) return std::nullopt;
  LiveConfig config;
  config.endpoint = endpoint;
  config.model = model;
  if (const char* key = std::getenv("TGEN_LLM_API_KEY")) config.api_key = key;
  if (const char* path = std::getenv("TGEN_LLM_PATH")) config.path = path;
  return config;
}

LiveProvider::LiveProvider(LiveConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty() || config_.model.empty()) {
    throw Error(ErrorKind::config_error, "live provider needs endpoint and model");
  }
}

std::string LiveProvider::complete(const CompletionRequest& request) {
  json messages = json::array();
  for (const Message& m : request.messages) {
    messages.push_back(json{{"role", to_string(m.role)}, {"content", m.content}});
  }
  json body{{"model", config_.model},
            {"messages", messages},
            {"temperature", request.temperature},
            {"max_tokens", request.max_output}};

  httplib::Client client(config_.endpoint);
  client.set_read_timeout(config_.timeout_seconds, 0);
  client.set_write_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  auto result = client.Post(config_.path, headers, body.dump(), "application/json");
  if (!result) {
    throw Error(ErrorKind::provider_error,
                "transport failure: " + httplib::to_string(result.error()))
        .set_retryable(true);
  }
  if (result->status != 200) {
    const bool retryable = result->status == 429 || result->status >= 500;
    throw Error(ErrorKind::provider_error,
                "HTTP " + std::to_string(result->status) + ": " + result->body)
        .set_retryable(retryable);
  }
  json doc = json::parse(result->body, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorKind::provider_error, "non-JSON provider response")
        .set_retryable(false);
  }
  try {
    return doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::provider_error,
                std::string("unexpected response shape: ") + e.what());
  }
}

}  // namespace tgen::llm
