#include "tgen/workspace.hpp"

#include <cctype>

#include "tgen/error.hpp"
#include "tgen/java_scan.hpp"

namespace tgen::workspace {
namespace {

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool assertion_callee(const std::string& name) {
  if (name.rfind("assert", 0) == 0 && name.size() > 0) return true;
  return name == "fail" || name == "verify";
}

// Walks back over a dotted qualifier chain (Assert.assertTrue -> start of
// "Assert"). Positions index into the masked source, so literals can't fool it.
std::size_t qualifier_start(const std::string& masked, std::size_t token_start) {
  std::size_t start = token_start;
  while (start > 0 && masked[start - 1] == '.') {
    std::size_t p = start - 1;  // at the '.'
    if (p == 0 || !ident_char(masked[p - 1])) break;
    std::size_t q = p;
    while (q > 0 && ident_char(masked[q - 1])) --q;
    if (!ident_start(masked[q])) break;
    start = q;
  }
  return start;
}

const index::IndexedSymbol* resolve_method(const index::SymbolIndex& index,
                                           const std::string& selector) {
  const auto items = index.query(selector, index::QueryKind::method, nullptr,
                                 true, model::Provenance::stage2_query);
  const index::IndexedSymbol* symbol = index.find(items.front().symbol);
  if (symbol == nullptr) {
    throw Error(ErrorKind::not_found, "selector '" + selector +
                                          "' resolved to an unindexed symbol");
  }
  return symbol;
}

std::string member_part(const index::IndexedSymbol& symbol) {
  if (!symbol.owner.empty() &&
      symbol.qualified.rfind(symbol.owner + ".", 0) == 0) {
    return symbol.qualified.substr(symbol.owner.size() + 1);
  }
  return symbol.simple;
}

}  // namespace

std::vector<model::AssertionSite> extract_assertions(const std::string& source) {
  const std::string masked = index::mask_java(source);
  std::vector<model::AssertionSite> sites;
  std::size_t i = 0;
  while (i < masked.size()) {
    if (!ident_start(masked[i]) || (i > 0 && ident_char(masked[i - 1]))) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < masked.size() && ident_char(masked[end])) ++end;
    const std::string token = masked.substr(i, end - i);
    if (!assertion_callee(token) || index::is_java_keyword(token)) {
      i = end;
      continue;
    }
    std::size_t p = end;
    while (p < masked.size() && std::isspace(static_cast<unsigned char>(masked[p]))) ++p;
    if (p >= masked.size() || masked[p] != '(') {
      i = end;
      continue;
    }
    int depth = 0;
    std::size_t q = p;
    for (; q < masked.size(); ++q) {
      if (masked[q] == '(') ++depth;
      if (masked[q] == ')' && --depth == 0) break;
    }
    if (q >= masked.size()) break;  // unbalanced tail; nothing more to find
    std::size_t semi = q + 1;
    while (semi < masked.size() &&
           std::isspace(static_cast<unsigned char>(masked[semi]))) {
      ++semi;
    }
    if (semi >= masked.size() || masked[semi] != ';') {
      i = q + 1;
      continue;
    }
    const std::size_t start = qualifier_start(masked, i);
    sites.push_back(model::AssertionSite{
        source.substr(start, semi + 1 - start), start, semi + 1 - start});
    i = semi + 1;
  }
  return sites;
}

std::string file_skeleton(const index::SymbolIndex& index,
                          const index::IndexedSymbol& symbol) {
  const auto it = index.by_file().find(symbol.file);
  std::string out;
  if (it != index.by_file().end()) {
    for (const std::string& qualified : it->second) {
      const index::IndexedSymbol* s = index.find(qualified);
      if (s == nullptr || s->kind != model::SymbolKind::class_ ||
          !s->owner.empty()) {
        continue;
      }
      if (!out.empty()) out += "\n\n";
      out += s->definition;
    }
  }
  if (out.empty()) {
    // File with no indexed top-level type: fall back to the declaring type.
    const index::IndexedSymbol* owner = index.find(symbol.owner);
    out = owner != nullptr ? owner->definition : symbol.definition;
  }
  return out;
}

model::FocalMethod select_focal(const index::SymbolIndex& index,
                                const std::string& selector,
                                const std::string& project) {
  const index::IndexedSymbol* symbol = resolve_method(index, selector);
  model::FocalMethod fm;
  fm.id = model::make_symbol_id(project, symbol->owner, member_part(*symbol));
  fm.source = symbol->definition;
  fm.file_skeleton = file_skeleton(index, *symbol);
  fm.project = project;
  model::validate(fm);
  return fm;
}

model::TestCase select_test(const index::SymbolIndex& index,
                            const std::string& selector,
                            const std::string& project,
                            const std::string& focal_id) {
  const index::IndexedSymbol* symbol = resolve_method(index, selector);
  model::TestCase tc;
  tc.id = model::make_symbol_id(project, symbol->owner, member_part(*symbol));
  tc.name = symbol->simple;
  tc.source = symbol->definition;
  tc.focal_id = focal_id;
  tc.assertions = extract_assertions(tc.source);
  tc.origin = model::TestOrigin::developer;
  model::validate(tc);
  return tc;
}

}  // namespace tgen::workspace
