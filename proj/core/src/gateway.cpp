#include "tgen/gateway.hpp"

#include <cstdio>
#include <fstream>

#include "tgen/error.hpp"

namespace tgen::llm {

const char* to_string(Role role) {
  switch (role) {
    case Role::system:
      return "system";
    case Role::user:
      return "user";
    case Role::assistant:
      return "assistant";
  }
  return "?";
}

Role role_from_string(const std::string& s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  throw Error(ErrorKind::schema_error, "unknown role: " + s);
}

void validate(const CompletionRequest& request) {
  if (request.messages.empty()) {
    throw invariant_violation("messages non-empty");
  }
  const Role first = request.messages.front().role;
  if (first != Role::system && first != Role::user) {
    throw invariant_violation("first message role system or user");
  }
  if (request.temperature < 0) {
    throw invariant_violation("temperature >= 0");
  }
}

std::string request_digest(const CompletionRequest& request) {
  json messages = json::array();
  for (const Message& m : request.messages) {
    messages.push_back(
        json{{"role", to_string(m.role)}, {"content", collapse_ws(m.content)}});
  }
  char temp[64];
  std::snprintf(temp, sizeof(temp), "%.6g", request.temperature);
  json canon{{"messages", messages},
             {"temperature", std::string(temp)},
             {"max_output", request.max_output}};
  return fnv1a_hex(canonical_dump(canon));
}

Transcript load_transcript(const std::filesystem::path& path) {
  Transcript transcript;
  const std::string text = read_file(path);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line == "\r") continue;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw Error(ErrorKind::parse_error,
                  "transcript line " + std::to_string(line_no) + " is not a JSON object")
          .set_line(line_no);
    }
    if (doc.contains("meta")) {
      transcript.meta = doc["meta"];
      continue;
    }
    if (!doc.contains("digest") || !doc.contains("response")) {
      throw Error(ErrorKind::schema_error,
                  "transcript line " + std::to_string(line_no) +
                      " missing digest/response")
          .set_line(line_no);
    }
    TranscriptEntry entry;
    entry.digest = doc["digest"].get<std::string>();
    entry.response = doc["response"].get<std::string>();
    if (doc.contains("tag")) entry.tag = doc["tag"].get<std::string>();
    transcript.entries.push_back(std::move(entry));
  }
  return transcript;
}

TranscriptRecorder::TranscriptRecorder(std::filesystem::path path)
    : path_(std::move(path)) {
  if (path_.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path_.parent_path(), ec);
  }
}

void TranscriptRecorder::write_line(const json& line) {
  std::lock_guard<std::mutex> lock(mu_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) {
    throw Error(ErrorKind::io_error, "cannot append to transcript " + path_.string());
  }
  out << line.dump() << "\n";
}

void TranscriptRecorder::append(const std::string& digest, const std::string& tag,
                                const std::string& response) {
  write_line(json{{"digest", digest}, {"tag", tag}, {"response", response}});
}

void TranscriptRecorder::append_meta(const json& meta) {
  write_line(json{{"meta", meta}});
}

Gateway::Gateway(std::shared_ptr<Provider> provider,
                 std::shared_ptr<TranscriptRecorder> recorder)
    : provider_(std::move(provider)), recorder_(std::move(recorder)) {
  if (!provider_) {
    throw Error(ErrorKind::config_error, "gateway requires a provider");
  }
}

std::string Gateway::complete(const CompletionRequest& request) {
  validate(request);
  {
    std::lock_guard<std::mutex> lock(mu_);
    calls_[request.tag] += 1;
  }
  const std::string response = provider_->complete(request);
  if (recorder_) {
    recorder_->append(request_digest(request), request.tag, response);
  }
  return response;
}

json Gateway::complete_structured(const CompletionRequest& request,
                                  const Schema& schema) {
  const std::string first = complete(request);
  try {
    return schema.parse(first);
  } catch (const Error&) {
    // fall through to the single corrective retry
  }
  CompletionRequest retry = request;
  retry.messages.push_back(Message{Role::assistant, first});
  retry.messages.push_back(Message{Role::user, schema.corrective_hint});
  const std::string second = complete(retry);
  try {
    return schema.parse(second);
  } catch (const Error& e) {
    throw Error(ErrorKind::malformed_output,
                "schema '" + schema.id + "' violated after retry: " + e.message());
  }
}

int Gateway::calls(const std::string& tag) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = calls_.find(tag);
  return it == calls_.end() ? 0 : it->second;
}

int Gateway::total_calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  int total = 0;
  for (const auto& [tag, count] : calls_) total += count;
  return total;
}

std::map<std::string, int> Gateway::calls_by_tag() const {
  std::lock_guard<std::mutex> lock(mu_);
  return calls_;
}

}  // namespace tgen::llm
