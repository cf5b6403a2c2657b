#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "tgen/jsonio.hpp"

namespace tgen::llm {

enum class Role { system, user, assistant };
const char* to_string(Role role);
Role role_from_string(const std::string& s);

struct Message {
  Role role = Role::user;
  std::string content;
  bool operator==(const Message&) const = default;
};

struct CompletionRequest {
  std::vector<Message> messages;
  double temperature = 0.0;
  int max_output = 4096;
  std::string tag;  // purpose label, e.g. "stage2.template"; not digested
};

// messages non-empty; first message role is system or user.
void validate(const CompletionRequest& request);

// Stable hash of the canonicalized request: key-ordered JSON of messages
// (content whitespace-collapsed), temperature, max_output. The tag is a
// routing label and deliberately excluded, so semantically identical requests
// collide regardless of labeling.
std::string request_digest(const CompletionRequest& request);

class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  virtual const char* name() const = 0;
};

enum class TranscriptMode { record, replay };

struct TranscriptEntry {
  std::string digest;
  std::string tag;
  std::string response;
};

struct Transcript {
  std::vector<TranscriptEntry> entries;
  TranscriptMode mode = TranscriptMode::replay;
  json meta;  // optional leading meta entry (e.g. originating manifest id)
};

Transcript load_transcript(const std::filesystem::path& path);

// Append-only transcript writer; appends are serialized internally so
// concurrent pipeline workers may share one recorder.
class TranscriptRecorder {
 public:
  explicit TranscriptRecorder(std::filesystem::path path);
  void append(const std::string& digest, const std::string& tag,
              const std::string& response);
  void append_meta(const json& meta);
  const std::filesystem::path& path() const { return path_; }

 private:
  void write_line(const json& line);
  std::filesystem::path path_;
  std::mutex mu_;
};

// Expected output shape for complete_structured. `parse` returns the
// normalized structured value or throws (MalformedOutput / SchemaError)
// when the response does not conform.
struct Schema {
  std::string id;
  std::function<json(const std::string&)> parse;
  std::string corrective_hint;  // appended as a user message on the one retry
};

// Uniform completion front door: counts calls per tag, records transcripts,
// and enforces the structured-output retry contract.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Provider> provider,
                   std::shared_ptr<TranscriptRecorder> recorder = nullptr);

  // Returns provider text verbatim; appends to the transcript in record mode.
  std::string complete(const CompletionRequest& request);

  // complete + schema validation; on violation, one reissue with the
  // schema's corrective hint appended, then MalformedOutput.
  json complete_structured(const CompletionRequest& request, const Schema& schema);

  int calls(const std::string& tag) const;
  int total_calls() const;
  std::map<std::string, int> calls_by_tag() const;

  Provider& provider() { return *provider_; }

 private:
  std::shared_ptr<Provider> provider_;
  std::shared_ptr<TranscriptRecorder> recorder_;
  mutable std::mutex mu_;
  std::map<std::string, int> calls_;
};

}  // namespace tgen::llm
