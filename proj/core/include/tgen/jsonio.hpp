#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

namespace tgen {

using json = nlohmann::json;

// Canonical document form: sorted object keys (nlohmann::json default),
// two-space indentation, single trailing newline. Every artifact we persist
// goes through this so identical content yields identical bytes.
std::string canonical_dump(const json& doc);

// FNV-1a 64-bit over a byte string, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

// Parse with IoError on read failure and ParseError on bad JSON.
json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& doc);

// Envelope helpers. Persisted artifacts are objects carrying an "artifact"
// tag naming the payload type; parse side checks the tag before decoding.
json make_envelope(const std::string& tag, json payload);
json open_envelope(const std::string& expected_tag, const json& doc);

// Whitespace canonicalization used for digests and loose matching: collapse
// every run of whitespace to one space, trim ends.
std::string collapse_ws(const std::string& text);

// Lowercase ASCII copy.
std::string to_lower(const std::string& text);

}  // namespace tgen
