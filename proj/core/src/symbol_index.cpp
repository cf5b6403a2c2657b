#include "tgen/index.hpp"

#include <algorithm>
#include <deque>

#include "tgen/error.hpp"
#include "tgen/java_scan.hpp"

namespace tgen::index {

namespace {

std::size_t arity(const std::string& params) {
  if (params.empty()) return 0;
  return static_cast<std::size_t>(std::count(params.begin(), params.end(), ',')) + 1;
}

std::string member_qualified(const std::string& owner, const RawMember& m) {
  if (m.kind == model::SymbolKind::field) return owner + "." + m.name;
  return owner + "." + m.name + "(" + m.params + ")";
}

std::string signature_line(const RawMember& m) {
  const std::size_t brace = m.definition.find('{');
  if (brace == std::string::npos) return tgen::collapse_ws(m.definition);
  return tgen::collapse_ws(m.definition.substr(0, brace)) + " { ... }";
}

std::string type_outline(const RawType& type) {
  std::string out = type.definition + " {\n";
  for (const RawMember& m : type.members) {
    out += "  " + signature_line(m) + "\n";
  }
  out += "}";
  return out;
}

}  // namespace

QueryKind query_kind_from_string(const std::string& s) {
  if (s == "any" || s.empty()) return QueryKind::any;
  if (s == "class") return QueryKind::class_;
  if (s == "constructor") return QueryKind::constructor;
  if (s == "method") return QueryKind::method;
  if (s == "field") return QueryKind::field;
  if (s == "family") return QueryKind::family;
  throw Error(ErrorKind::schema_error, "unknown query kind: " + s);
}

const char* to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::any:
      return "any";
    case QueryKind::class_:
      return "class";
    case QueryKind::constructor:
      return "constructor";
    case QueryKind::method:
      return "method";
    case QueryKind::field:
      return "field";
    case QueryKind::family:
      return "family";
  }
  return "?";
}

model::KnowledgeItem to_knowledge(const IndexedSymbol& symbol,
                                  model::Provenance provenance) {
  model::KnowledgeItem item;
  item.symbol = symbol.qualified;
  item.kind = symbol.kind;
  item.definition = symbol.definition;
  item.usages = symbol.usages;
  item.provenance = provenance;
  return item;
}

SymbolIndex SymbolIndex::build(const std::filesystem::path& project_root) {
  std::vector<std::pair<std::string, std::filesystem::path>> files;
  std::error_code ec;
  for (std::filesystem::recursive_directory_iterator it(project_root, ec), end;
       it != end && !ec; it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    if (it->path().extension() != ".java") continue;
    files.emplace_back(
        std::filesystem::relative(it->path(), project_root).generic_string(),
        it->path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw Error(ErrorKind::empty_project,
                "no source files under " + project_root.string());
  }

  SymbolIndex index;
  std::vector<FileScan> scans;
  for (const auto& [relative, full] : files) {
    FileScan scan = scan_java_file(relative, read_file(full));
    if (!scan.ok) {
      index.warnings_.push_back(scan.warning);
      continue;
    }
    scans.push_back(std::move(scan));
  }

  // Pass 1: declarations.
  std::map<std::string, const RawType*> types_by_qualified;
  std::map<std::string, std::vector<std::string>> imports_by_type;
  for (const FileScan& scan : scans) {
    for (const RawType& type : scan.types) {
      IndexedSymbol symbol;
      symbol.qualified = type.qualified;
      symbol.simple = type.name;
      symbol.kind = model::SymbolKind::class_;
      symbol.definition = type_outline(type);
      symbol.file = scan.path;
      symbol.line = type.line;
      symbol.end_line = type.end_line;
      const std::size_t dot = type.qualified.rfind('.');
      symbol.owner = dot == std::string::npos ? "" : type.qualified.substr(0, dot);
      if (symbol.owner == scan.package_name) symbol.owner = "";
      if (!index.symbols_.emplace(symbol.qualified, symbol).second) {
        index.warnings_.push_back(scan.path + ": duplicate type " + type.qualified);
        continue;
      }
      index.by_file_[scan.path].push_back(type.qualified);
      types_by_qualified[type.qualified] = &type;
      imports_by_type[type.qualified] = scan.imports;

      for (const RawMember& m : type.members) {
        IndexedSymbol ms;
        ms.qualified = member_qualified(type.qualified, m);
        ms.simple = m.name;
        ms.kind = m.kind;
        ms.definition = m.definition;
        ms.file = scan.path;
        ms.line = m.line;
        ms.end_line = m.end_line;
        ms.owner = type.qualified;
        if (!index.symbols_.emplace(ms.qualified, ms).second) {
          index.warnings_.push_back(scan.path + ": duplicate member " + ms.qualified);
          continue;
        }
        index.by_file_[scan.path].push_back(ms.qualified);
      }
    }
  }

  // Pass 2: hierarchy (project-internal parents only).
  std::map<std::string, std::vector<std::string>> by_simple_type;
  for (const auto& [qualified, type] : types_by_qualified) {
    by_simple_type[type->name].push_back(qualified);
  }
  auto resolve_super = [&](const std::string& name, const std::string& from_qualified)
      -> std::string {
    if (types_by_qualified.count(name)) return name;
    // import-based resolution
    for (const std::string& imp : imports_by_type[from_qualified]) {
      if (imp.size() > name.size() &&
          imp.compare(imp.size() - name.size(), name.size(), name) == 0 &&
          imp[imp.size() - name.size() - 1] == '.' &&
          types_by_qualified.count(imp)) {
        return imp;
      }
    }
    // same package, then unique simple-name match
    const std::size_t dot = from_qualified.rfind('.');
    const std::string pkg = dot == std::string::npos ? "" : from_qualified.substr(0, dot);
    auto it = by_simple_type.find(name);
    if (it == by_simple_type.end()) return "";
    for (const std::string& candidate : it->second) {
      const std::size_t cdot = candidate.rfind('.');
      const std::string cpkg =
          cdot == std::string::npos ? "" : candidate.substr(0, cdot);
      if (cpkg == pkg) return candidate;
    }
    if (it->second.size() == 1) return it->second.front();
    return "";
  };

  for (const auto& [qualified, type] : types_by_qualified) {
    HierarchyEntry entry;
    for (const std::string& super : type->supers) {
      const std::string parent = resolve_super(super, qualified);
      if (!parent.empty() && parent != qualified) entry.parents.push_back(parent);
    }
    // overridden methods: same simple name + arity in a direct parent
    for (const std::string& parent : entry.parents) {
      const RawType* ptype = types_by_qualified[parent];
      for (const RawMember& m : type->members) {
        if (m.kind != model::SymbolKind::method) continue;
        for (const RawMember& pm : ptype->members) {
          if (pm.kind != model::SymbolKind::method) continue;
          if (pm.name == m.name && arity(pm.params) == arity(m.params)) {
            entry.overridden.emplace_back(member_qualified(qualified, m),
                                          member_qualified(parent, pm));
          }
        }
      }
    }
    if (!entry.parents.empty() || !entry.overridden.empty()) {
      index.hierarchy_[qualified] = std::move(entry);
    }
  }

  // Pass 3: usage sites — identifier occurrences per line, declaration line
  // excluded for the symbol itself.
  std::multimap<std::string, std::string> by_simple;
  for (const auto& [qualified, symbol] : index.symbols_) {
    by_simple.emplace(symbol.simple, qualified);
  }
  for (const auto& [relative, full] : files) {
    bool scanned = false;
    for (const FileScan& scan : scans) {
      if (scan.path == relative) {
        scanned = true;
        break;
      }
    }
    if (!scanned) continue;
    const std::string masked = mask_java(read_file(full));
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= masked.size()) {
      std::size_t eol = masked.find('\n', pos);
      if (eol == std::string::npos) eol = masked.size();
      ++line_no;
      std::set<std::string> seen_on_line;
      for (const std::string& token :
           java_identifiers(masked.substr(pos, eol - pos))) {
        if (!seen_on_line.insert(token).second) continue;
        auto [lo, hi] = by_simple.equal_range(token);
        for (auto it = lo; it != hi; ++it) {
          IndexedSymbol& symbol = index.symbols_[it->second];
          if (symbol.file == relative && symbol.line == line_no) continue;
          symbol.usages.push_back(model::UsageSite{relative, line_no});
        }
      }
      if (eol == masked.size()) break;
      pos = eol + 1;
    }
  }

  return index;
}

const IndexedSymbol* SymbolIndex::find(const std::string& qualified) const {
  auto it = symbols_.find(qualified);
  return it == symbols_.end() ? nullptr : &it->second;
}

namespace {

bool kind_matches(QueryKind filter, model::SymbolKind kind) {
  switch (filter) {
    case QueryKind::any:
      return true;
    case QueryKind::class_:
      return kind == model::SymbolKind::class_;
    case QueryKind::constructor:
      return kind == model::SymbolKind::constructor;
    case QueryKind::method:
      return kind == model::SymbolKind::method;
    case QueryKind::field:
      return kind == model::SymbolKind::field;
    case QueryKind::family:
      return kind == model::SymbolKind::class_;
  }
  return false;
}

}  // namespace

std::vector<model::KnowledgeItem> SymbolIndex::query(
    const std::string& name, QueryKind kind, const std::set<std::string>* scope,
    bool required, model::Provenance provenance) const {
  std::vector<const IndexedSymbol*> matched;
  for (const auto& [qualified, symbol] : symbols_) {
    if (!kind_matches(kind, symbol.kind)) continue;
    if (qualified == name || symbol.simple == name) matched.push_back(&symbol);
  }
  if (matched.empty()) {
    for (const auto& [qualified, symbol] : symbols_) {
      if (!kind_matches(kind, symbol.kind)) continue;
      const std::string dotted = "." + name;
      const bool suffix =
          qualified.size() > dotted.size() &&
          qualified.compare(qualified.size() - dotted.size(), dotted.size(),
                            dotted) == 0;
      const bool method_stem = qualified.find(dotted + "(") != std::string::npos;
      if (suffix || method_stem) matched.push_back(&symbol);
    }
  }

  if (kind == QueryKind::family && !matched.empty()) {
    // expand to the subtype family of the matched types' root ancestors
    std::map<std::string, std::vector<std::string>> children;
    for (const auto& [child, entry] : hierarchy_) {
      for (const std::string& parent : entry.parents) {
        children[parent].push_back(child);
      }
    }
    std::set<std::string> roots;
    for (const IndexedSymbol* m : matched) {
      std::set<std::string> visited;
      std::deque<std::string> up{m->qualified};
      while (!up.empty()) {
        const std::string current = up.front();
        up.pop_front();
        if (!visited.insert(current).second) continue;
        auto it = hierarchy_.find(current);
        if (it == hierarchy_.end() || it->second.parents.empty()) {
          roots.insert(current);
        } else {
          for (const std::string& parent : it->second.parents) up.push_back(parent);
        }
      }
    }
    std::set<std::string> family;
    std::deque<std::string> down(roots.begin(), roots.end());
    while (!down.empty()) {
      const std::string current = down.front();
      down.pop_front();
      if (!family.insert(current).second) continue;
      auto it = children.find(current);
      if (it != children.end()) {
        for (const std::string& child : it->second) down.push_back(child);
      }
    }
    // queried matches first, then the rest of the family in sorted order
    std::set<std::string> already;
    for (const IndexedSymbol* m : matched) already.insert(m->qualified);
    for (const std::string& qualified : family) {
      if (already.count(qualified)) continue;
      const IndexedSymbol* symbol = find(qualified);
      if (symbol) matched.push_back(symbol);
    }
  }

  std::vector<model::KnowledgeItem> out;
  for (const IndexedSymbol* symbol : matched) {
    if (scope && !scope->count(symbol->qualified)) continue;
    out.push_back(to_knowledge(*symbol, provenance));
  }
  if (out.empty() && required) {
    throw Error(ErrorKind::not_found, "no symbol matches '" + name + "'" +
                                          (scope ? " within scope" : ""));
  }
  return out;
}

const IndexedSymbol* SymbolIndex::find_enclosing(const std::string& file,
                                                 std::size_t line) const {
  auto it = by_file_.find(file);
  if (it == by_file_.end()) return nullptr;
  const IndexedSymbol* best = nullptr;
  for (const std::string& qualified : it->second) {
    const IndexedSymbol* symbol = find(qualified);
    if (!symbol || line < symbol->line || line > symbol->end_line) continue;
    if (!best) {
      best = symbol;
      continue;
    }
    const std::size_t best_span = best->end_line - best->line;
    const std::size_t span = symbol->end_line - symbol->line;
    if (span < best_span ||
        (span == best_span && best->kind == model::SymbolKind::class_ &&
         symbol->kind != model::SymbolKind::class_)) {
      best = symbol;
    }
  }
  return best;
}

json SymbolIndex::to_json() const {
  json symbols = json::array();
  for (const auto& [qualified, s] : symbols_) {
    json usages = json::array();
    for (const model::UsageSite& u : s.usages) {
      usages.push_back(json{{"file", u.file}, {"line", u.line}});
    }
    symbols.push_back(json{{"qualified", s.qualified},
                           {"simple", s.simple},
                           {"kind", model::to_string(s.kind)},
                           {"definition", s.definition},
                           {"file", s.file},
                           {"line", s.line},
                           {"end_line", s.end_line},
                           {"owner", s.owner},
                           {"usages", usages}});
  }
  json hierarchy = json::object();
  for (const auto& [qualified, entry] : hierarchy_) {
    json overridden = json::array();
    for (const auto& [method, parent_method] : entry.overridden) {
      overridden.push_back(json{{"method", method}, {"parent", parent_method}});
    }
    hierarchy[qualified] =
        json{{"parents", entry.parents}, {"overridden", overridden}};
  }
  json by_file = json::object();
  for (const auto& [file, names] : by_file_) by_file[file] = names;
  return json{{"artifact", "symbol_index"},
              {"symbols", symbols},
              {"hierarchy", hierarchy},
              {"by_file", by_file},
              {"warnings", warnings_}};
}

SymbolIndex SymbolIndex::from_json(const json& doc) {
  SymbolIndex index;
  if (!doc.is_object() || doc.value("artifact", "") != "symbol_index") {
    throw Error(ErrorKind::schema_error, "not a symbol_index document");
  }
  for (const json& s : doc.at("symbols")) {
    IndexedSymbol symbol;
    symbol.qualified = s.at("qualified").get<std::string>();
    symbol.simple = s.at("simple").get<std::string>();
    symbol.kind = model::symbol_kind_from_string(s.at("kind").get<std::string>());
    symbol.definition = s.at("definition").get<std::string>();
    symbol.file = s.at("file").get<std::string>();
    symbol.line = s.at("line").get<std::size_t>();
    symbol.end_line = s.at("end_line").get<std::size_t>();
    symbol.owner = s.at("owner").get<std::string>();
    for (const json& u : s.at("usages")) {
      symbol.usages.push_back(model::UsageSite{u.at("file").get<std::string>(),
                                               u.at("line").get<std::size_t>()});
    }
    index.symbols_[symbol.qualified] = std::move(symbol);
  }
  const json& hierarchy = doc.at("hierarchy");
  for (auto it = hierarchy.begin(); it != hierarchy.end(); ++it) {
    HierarchyEntry entry;
    for (const json& p : it.value().at("parents")) {
      entry.parents.push_back(p.get<std::string>());
    }
    for (const json& o : it.value().at("overridden")) {
      entry.overridden.emplace_back(o.at("method").get<std::string>(),
                                    o.at("parent").get<std::string>());
    }
    index.hierarchy_[it.key()] = std::move(entry);
  }
  const json& by_file = doc.at("by_file");
  for (auto it = by_file.begin(); it != by_file.end(); ++it) {
    index.by_file_[it.key()] = it.value().get<std::vector<std::string>>();
  }
  for (const json& w : doc.at("warnings")) {
    index.warnings_.push_back(w.get<std::string>());
  }
  return index;
}

void SymbolIndex::save(const std::filesystem::path& path) const {
  write_json(path, to_json());
}

SymbolIndex SymbolIndex::load(const std::filesystem::path& path) {
  return from_json(read_json(path));
}

Neighborhood neighborhood(const model::FocalMethod& fm, const model::TestCase& tc,
                          const SymbolIndex& index) {
  Neighborhood hood;
  std::set<std::string> tokens;
  for (const std::string& t : java_identifiers(fm.source)) tokens.insert(t);
  for (const std::string& t : java_identifiers(tc.source)) tokens.insert(t);

  // Seed: the focal method's declaring type and all its members.
  std::string declaring;
  if (auto parts = model::parse_symbol_id(fm.id)) {
    if (index.find(parts->type)) declaring = parts->type;
  }
  if (declaring.empty()) {
    const std::string collapsed = collapse_ws(fm.source);
    for (const auto& [qualified, symbol] : index.symbols()) {
      if (symbol.kind != model::SymbolKind::class_ &&
          collapse_ws(symbol.definition) == collapsed) {
        declaring = symbol.owner;
        break;
      }
    }
  }
  if (!declaring.empty()) {
    hood.allowed.insert(declaring);
    for (const auto& [qualified, symbol] : index.symbols()) {
      if (symbol.owner == declaring) hood.allowed.insert(qualified);
    }
  }

  // Directly referenced symbols.
  std::set<std::string> matched_tokens;
  for (const auto& [qualified, symbol] : index.symbols()) {
    if (tokens.count(symbol.simple)) {
      hood.allowed.insert(qualified);
      matched_tokens.insert(symbol.simple);
    }
    if (tokens.count(qualified)) {
      hood.allowed.insert(qualified);
      matched_tokens.insert(qualified);
    }
  }

  // One-hop closure: parent types of referenced types, overridden parent
  // methods of referenced methods.
  const std::set<std::string> direct = hood.allowed;
  for (const std::string& qualified : direct) {
    const IndexedSymbol* symbol = index.find(qualified);
    if (!symbol) continue;
    if (symbol->kind == model::SymbolKind::class_) {
      auto it = index.hierarchy().find(qualified);
      if (it != index.hierarchy().end()) {
        for (const std::string& parent : it->second.parents) {
          hood.allowed.insert(parent);
        }
      }
    } else if (symbol->kind == model::SymbolKind::method) {
      auto it = index.hierarchy().find(symbol->owner);
      if (it != index.hierarchy().end()) {
        for (const auto& [method, parent_method] : it->second.overridden) {
          if (method == qualified) hood.allowed.insert(parent_method);
        }
      }
    }
  }

  for (const std::string& token : tokens) {
    if (!matched_tokens.count(token)) ++hood.unresolved;
  }
  return hood;
}

}  // namespace tgen::index
