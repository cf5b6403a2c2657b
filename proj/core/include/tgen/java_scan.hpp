#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tgen/model.hpp"

namespace tgen::index {

// Syntax-level scan of one Java source file: type declarations with their
// extends/implements lists, and member declarations (fields, methods,
// constructors) with verbatim definition text and line spans. This is a
// brace/token scanner, not a grammar parser; it is deliberately tolerant of
// anything that does not affect declaration structure.

struct RawMember {
  model::SymbolKind kind = model::SymbolKind::method;
  std::string name;        // simple name
  std::string params;      // comma-joined parameter types ("" for fields)
  std::string definition;  // verbatim declaration text
  std::size_t line = 0;    // 1-based first line
  std::size_t end_line = 0;
};

struct RawType {
  std::string name;       // simple name
  std::string qualified;  // package.Outer.Inner
  std::vector<std::string> supers;  // extends + implements, as written
  std::string definition;           // declaration header text
  std::size_t line = 0;
  std::size_t end_line = 0;
  std::vector<RawMember> members;
};

struct FileScan {
  std::string path;  // label supplied by the caller (project-relative)
  std::string package_name;
  std::vector<std::string> imports;
  std::vector<RawType> types;
  bool ok = true;          // false: structural failure, symbols unusable
  std::string warning;
};

FileScan scan_java_file(const std::string& path_label, const std::string& content);

// Comments and string/char literals replaced by spaces; newlines and byte
// positions preserved. Shared by the scanner and identifier extraction.
std::string mask_java(const std::string& content);

// Identifier tokens of masked source, in order, duplicates kept,
// Java keywords excluded.
std::vector<std::string> java_identifiers(const std::string& content);

bool is_java_keyword(const std::string& token);

}  // namespace tgen::index
