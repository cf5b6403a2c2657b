#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tgen/jsonio.hpp"
#include "tgen/model.hpp"

namespace tgen::index {

struct IndexedSymbol {
  std::string qualified;  // pkg.Type, pkg.Type.field, pkg.Type.method(params)
  std::string simple;     // Type / member name
  model::SymbolKind kind = model::SymbolKind::class_;
  std::string definition;
  std::string file;  // project-relative path
  std::size_t line = 0;
  std::size_t end_line = 0;
  std::string owner;  // qualified declaring type ("" for top-level types)
  std::vector<model::UsageSite> usages;
};

struct HierarchyEntry {
  std::vector<std::string> parents;  // project-internal qualified parents
  // (method qualified, overridden parent-method qualified)
  std::vector<std::pair<std::string, std::string>> overridden;
};

// Allowed symbol set for scoped (Stage 1) queries.
struct Neighborhood {
  std::set<std::string> allowed;  // qualified names
  std::size_t unresolved = 0;     // identifiers that matched nothing
};

enum class QueryKind { any, class_, constructor, method, field, family };
QueryKind query_kind_from_string(const std::string& s);
const char* to_string(QueryKind kind);

// Immutable after build; safe to share across concurrent pipeline workers.
class SymbolIndex {
 public:
  SymbolIndex() = default;

  // Scans every .java file under project_root (sorted traversal, so builds
  // are deterministic). Files that fail to scan are skipped with a recorded
  // warning, never fatally. Throws EmptyProject when no source files exist.
  static SymbolIndex build(const std::filesystem::path& project_root);

  const std::map<std::string, IndexedSymbol>& symbols() const { return symbols_; }
  const std::map<std::string, HierarchyEntry>& hierarchy() const {
    return hierarchy_;
  }
  const std::map<std::string, std::vector<std::string>>& by_file() const {
    return by_file_;
  }
  const std::vector<std::string>& warnings() const { return warnings_; }

  const IndexedSymbol* find(const std::string& qualified) const;

  // Exact matches (qualified or simple name) first; suffix matches on
  // qualified names otherwise. A scope, when supplied, filters the result.
  // NotFound only when `required` and nothing matched. QueryKind::family
  // expands to the project subtype family of the named type's root ancestors.
  std::vector<model::KnowledgeItem> query(const std::string& name, QueryKind kind,
                                          const std::set<std::string>* scope,
                                          bool required,
                                          model::Provenance provenance) const;

  // Smallest indexed declaration spanning (file, line); prefers members over
  // their enclosing type. nullptr when nothing matches.
  const IndexedSymbol* find_enclosing(const std::string& file,
                                      std::size_t line) const;

  json to_json() const;
  static SymbolIndex from_json(const json& doc);
  void save(const std::filesystem::path& path) const;
  static SymbolIndex load(const std::filesystem::path& path);

 private:
  std::map<std::string, IndexedSymbol> symbols_;
  std::map<std::string, HierarchyEntry> hierarchy_;
  std::map<std::string, std::vector<std::string>> by_file_;
  std::vector<std::string> warnings_;
};

// Symbols whose simple or qualified names appear as identifiers in fm.source
// or tc.source, plus the focal method's own declaring type and its members,
// closed one hop over the hierarchy (parent types, overridden methods).
Neighborhood neighborhood(const model::FocalMethod& fm, const model::TestCase& tc,
                          const SymbolIndex& index);

model::KnowledgeItem to_knowledge(const IndexedSymbol& symbol,
                                  model::Provenance provenance);

}  // namespace tgen::index
