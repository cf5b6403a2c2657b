#pragma once

#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tgen/gateway.hpp"

namespace tgen::llm {

// Deterministic playback of a recorded transcript. Lookup is exact-match on
// the request digest; when a digest was recorded more than once the first
// occurrence wins, so a replayed request always gets one fixed response.
class ReplayProvider : public Provider {
 public:
  explicit ReplayProvider(const std::filesystem::path& transcript_path);
  explicit ReplayProvider(const Transcript& transcript);
  std::string complete(const CompletionRequest& request) override;
  const char* name() const override { return "replay"; }
  const json& meta() const { return meta_; }

 private:
  std::map<std::string, std::string> responses_;
  json meta_;
};

// Fixed response sequence for tests: each complete() pops the next response.
// An entry may pin the tag it expects, catching misrouted calls early.
class ScriptedProvider : public Provider {
 public:
  struct Entry {
    std::string response;
    std::optional<std::string> expect_tag;
  };

  ScriptedProvider() = default;
  explicit ScriptedProvider(std::vector<std::string> responses);

  ScriptedProvider& enqueue(std::string response,
                            std::optional<std::string> expect_tag = std::nullopt);
  std::string complete(const CompletionRequest& request) override;
  const char* name() const override { return "scripted"; }

  std::size_t remaining() const;
  const std::vector<CompletionRequest>& requests_seen() const { return seen_; }

 private:
  mutable std::mutex mu_;
  std::deque<Entry> queue_;
  std::vector<CompletionRequest> seen_;
};

// Computes the response from the request; for synthetic endless providers.
class StubProvider : public Provider {
 public:
  using Fn = std::function<std::string(const CompletionRequest&)>;
  explicit StubProvider(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(const CompletionRequest& request) override {
    return fn_(request);
  }
  const char* name() const override { return "stub"; }

 private:
  Fn fn_;
};

// Chat-completions HTTP provider. Configured explicitly or from the
// environment (TGEN_LLM_ENDPOINT, TGEN_LLM_MODEL, TGEN_LLM_API_KEY).
struct LiveConfig {
  std::string endpoint;  // e.g. "https://api.example.com"
  std::string model;
  std::string api_key;
  std::string path = "/v1/chat/completions";
  int timeout_seconds = 120;
};

// Reads LiveConfig from the environment; nullopt when endpoint/model unset.
std::optional<LiveConfig> live_config_from_env();

class LiveProvider : public Provider {
 public:
  explicit LiveProvider(LiveConfig config);
  std::string complete(const CompletionRequest& request) override;
  const char* name() const override { return "live"; }

 private:
  LiveConfig config_;
};

}  // namespace tgen::llm
