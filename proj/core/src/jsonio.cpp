#include "tgen/jsonio.hpp"

#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "tgen/error.hpp"

namespace tgen {

std::string canonical_dump(const json& doc) {
  return doc.dump(2) + "\n";
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    hash ^= static_cast<std::uint64_t>(c);
    hash *= 1099511628211ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[hash & 0xF];
    hash >>= 4;
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::io_error, "cannot read " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::io_error, "cannot write " + path.string());
  }
  out << content;
  if (!out) {
    throw Error(ErrorKind::io_error, "short write to " + path.string());
  }
}

json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorKind::parse_error, "invalid JSON in " + path.string());
  }
  return doc;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  write_file(path, canonical_dump(doc));
}

json make_envelope(const std::string& tag, json payload) {
  if (!payload.is_object()) {
    throw Error(ErrorKind::schema_error, "artifact payload must be an object");
  }
  payload["artifact"] = tag;
  return payload;
}

json open_envelope(const std::string& expected_tag, const json& doc) {
  if (!doc.is_object()) {
    throw Error(ErrorKind::schema_error, "artifact document must be an object");
  }
  auto it = doc.find("artifact");
  if (it == doc.end() || !it->is_string()) {
    throw Error(ErrorKind::schema_error, "missing artifact tag");
  }
  if (it->get<std::string>() != expected_tag) {
    throw Error(ErrorKind::schema_error,
                "artifact tag mismatch: expected " + expected_tag + ", found " +
                    it->get<std::string>());
  }
  json payload = doc;
  payload.erase("artifact");
  return payload;
}

std::string collapse_ws(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool in_ws = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_ws = true;
      continue;
    }
    if (in_ws && !out.empty()) {
      out.push_back(' ');
    }
    in_ws = false;
    out.push_back(static_cast<char>(c));
  }
  return out;
}

std::string to_lower(const std::string& text) {
  std::string out = text;
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace tgen
