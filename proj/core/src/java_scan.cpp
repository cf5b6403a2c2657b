#include "tgen/java_scan.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "tgen/jsonio.hpp"

namespace tgen::index {

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct LineMap {
  std::vector<std::size_t> starts;
  explicit LineMap(const std::string& s) {
    starts.push_back(0);
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == '\n') starts.push_back(i + 1);
    }
  }
  std::size_t line_of(std::size_t pos) const {
    auto it = std::upper_bound(starts.begin(), starts.end(), pos);
    return static_cast<std::size_t>(it - starts.begin());
  }
};

// Returns index just past the matching ')', or npos when unbalanced.
std::size_t skip_parens(const std::string& s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') {
      --depth;
      if (depth == 0) return i + 1;
    }
  }
  return std::string::npos;
}

// Returns index of the matching '}', or npos.
std::size_t find_matching_brace(const std::string& s, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '{') ++depth;
    if (s[i] == '}') {
      --depth;
      if (depth == 0) return i;
    }
  }
  return std::string::npos;
}

// From '=' to the ';' that ends the declaration statement (tracks nesting so
// array initializers, anonymous classes, and lambdas stay inside).
std::size_t find_statement_end(const std::string& s, std::size_t from) {
  int round = 0, curly = 0, square = 0;
  for (std::size_t i = from; i < s.size(); ++i) {
    switch (s[i]) {
      case '(': ++round; break;
      case ')': --round; break;
      case '{': ++curly; break;
      case '}': --curly; break;
      case '[': ++square; break;
      case ']': --square; break;
      case ';':
        if (round == 0 && curly == 0 && square == 0) return i;
        break;
      default: break;
    }
  }
  return std::string::npos;
}

std::string strip_annotations(const std::string& head) {
  std::string out;
  std::size_t i = 0;
  while (i < head.size()) {
    if (head[i] == '@') {
      ++i;
      while (i < head.size() && (ident_char(head[i]) || head[i] == '.')) ++i;
      while (i < head.size() &&
             std::isspace(static_cast<unsigned char>(head[i]))) {
        ++i;
      }
      if (i < head.size() && head[i] == '(') {
        std::size_t past = skip_parens(head, i);
        i = past == std::string::npos ? head.size() : past;
      }
      continue;
    }
    out.push_back(head[i]);
    ++i;
  }
  return out;
}

bool contains_token(const std::string& text, const std::string& word) {
  std::size_t pos = 0;
  while ((pos = text.find(word, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !ident_char(text[pos - 1]);
    const std::size_t after = pos + word.size();
    const bool right_ok = after >= text.size() || !ident_char(text[after]);
    if (left_ok && right_ok) return true;
    pos += word.size();
  }
  return false;
}

std::size_t token_pos(const std::string& text, const std::string& word) {
  std::size_t pos = 0;
  while ((pos = text.find(word, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !ident_char(text[pos - 1]);
    const std::size_t after = pos + word.size();
    const bool right_ok = after >= text.size() || !ident_char(text[after]);
    if (left_ok && right_ok) return pos;
    pos += word.size();
  }
  return std::string::npos;
}

std::string identifier_at(const std::string& text, std::size_t pos) {
  std::size_t end = pos;
  while (end < text.size() && ident_char(text[end])) ++end;
  return text.substr(pos, end - pos);
}

std::string last_identifier_before(const std::string& text, std::size_t limit) {
  std::size_t end = std::min(limit, text.size());
  while (end > 0 && !ident_char(text[end - 1])) --end;
  std::size_t begin = end;
  while (begin > 0 && ident_char(text[begin - 1])) --begin;
  return text.substr(begin, end - begin);
}

std::string first_identifier_from(const std::string& text, std::size_t pos) {
  while (pos < text.size() && !ident_start(text[pos])) ++pos;
  return pos < text.size() ? identifier_at(text, pos) : "";
}

// Splits a parameter list on top-level commas.
std::vector<std::string> split_params(const std::string& inner) {
  std::vector<std::string> parts;
  int round = 0, angle = 0, square = 0, curly = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= inner.size(); ++i) {
    const char c = i < inner.size() ? inner[i] : ',';
    switch (c) {
      case '(': ++round; break;
      case ')': --round; break;
      case '<': ++angle; break;
      case '>': --angle; break;
      case '[': ++square; break;
      case ']': --square; break;
      case '{': ++curly; break;
      case '}': --curly; break;
      case ',':
        if (round == 0 && angle == 0 && square == 0 && curly == 0) {
          std::string part = trim(inner.substr(start, i - start));
          if (!part.empty()) parts.push_back(part);
          start = i + 1;
        }
        break;
      default: break;
    }
  }
  return parts;
}

std::string param_type(const std::string& raw) {
  std::string p = trim(strip_annotations(raw));
  if (p.rfind("final ", 0) == 0) p = trim(p.substr(6));
  if (p.empty()) return p;
  std::size_t end = p.size();
  while (end > 0 && std::isspace(static_cast<unsigned char>(p[end - 1]))) --end;
  std::size_t begin = end;
  while (begin > 0 && ident_char(p[begin - 1])) --begin;
  if (begin == 0) return collapse_ws(p);  // lone token: the type itself
  std::string type = trim(p.substr(0, begin));
  if (type.empty()) return collapse_ws(p);
  return collapse_ws(type);
}

std::string params_signature(const std::string& inner) {
  std::string out;
  for (const std::string& part : split_params(inner)) {
    if (!out.empty()) out += ",";
    out += param_type(part);
  }
  return out;
}

// Supers list after 'extends'/'implements': dotted names, generics stripped.
std::vector<std::string> parse_super_list(const std::string& text) {
  std::vector<std::string> out;
  for (const std::string& part : split_params(text)) {
    std::string name;
    for (char c : part) {
      if (ident_char(c) || c == '.') {
        name.push_back(c);
      } else if (c == '<') {
        break;
      } else if (!name.empty()) {
        break;
      }
    }
    if (!name.empty()) out.push_back(name);
  }
  return out;
}

}  // namespace

std::string mask_java(const std::string& content) {
  std::string out = content;
  enum class State { code, line_comment, block_comment, string, chr } state =
      State::code;
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    const char next = i + 1 < content.size() ? content[i + 1] : '\0';
    switch (state) {
      case State::code:
        if (c == '/' && next == '/') {
          state = State::line_comment;
          out[i] = ' ';
        } else if (c == '/' && next == '*') {
          state = State::block_comment;
          out[i] = ' ';
        } else if (c == '"') {
          state = State::string;
        } else if (c == '\'') {
          state = State::chr;
        }
        break;
      case State::line_comment:
        if (c == '\n') {
          state = State::code;
        } else {
          out[i] = ' ';
        }
        break;
      case State::block_comment:
        if (c == '*' && next == '/') {
          out[i] = ' ';
          out[i + 1] = ' ';
          ++i;
          state = State::code;
        } else if (c != '\n') {
          out[i] = ' ';
        }
        break;
      case State::string:
        if (c == '\\') {
          out[i] = ' ';
          if (i + 1 < content.size() && content[i + 1] != '\n') out[i + 1] = ' ';
          ++i;
        } else if (c == '"') {
          state = State::code;
        } else if (c != '\n') {
          out[i] = ' ';
        }
        break;
      case State::chr:
        if (c == '\\') {
          out[i] = ' ';
          if (i + 1 < content.size() && content[i + 1] != '\n') out[i + 1] = ' ';
          ++i;
        } else if (c == '\'') {
          state = State::code;
        } else if (c != '\n') {
          out[i] = ' ';
        }
        break;
    }
  }
  return out;
}

bool is_java_keyword(const std::string& token) {
  static const std::set<std::string> keywords{
      "abstract", "assert",     "boolean",  "break",      "byte",
      "case",     "catch",      "char",     "class",      "const",
      "continue", "default",    "do",       "double",     "else",
      "enum",     "extends",    "final",    "finally",    "float",
      "for",      "goto",       "if",       "implements", "import",
      "instanceof", "int",      "interface", "long",      "native",
      "new",      "package",    "private",  "protected",  "public",
      "record",   "return",     "short",    "static",     "strictfp",
      "super",    "switch",     "synchronized", "this",   "throw",
      "throws",   "transient",  "try",      "void",       "volatile",
      "while",    "var",        "true",     "false",      "null"};
  return keywords.count(token) > 0;
}

std::vector<std::string> java_identifiers(const std::string& content) {
  const std::string masked = mask_java(content);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < masked.size()) {
    if (ident_start(masked[i])) {
      std::string token = identifier_at(masked, i);
      i += token.size();
      if (!is_java_keyword(token)) out.push_back(std::move(token));
    } else if (std::isdigit(static_cast<unsigned char>(masked[i]))) {
      while (i < masked.size() && ident_char(masked[i])) ++i;  // numeric literal
    } else {
      ++i;
    }
  }
  return out;
}

FileScan scan_java_file(const std::string& path_label, const std::string& content) {
  FileScan scan;
  scan.path = path_label;
  const std::string masked = mask_java(content);
  const LineMap lines(content);

  struct OpenType {
    std::size_t type_index;
    int body_depth;
    bool is_enum;
  };
  std::vector<OpenType> stack;

  auto qualified_prefix = [&]() {
    std::string q = scan.package_name;
    for (const OpenType& open : stack) {
      if (!q.empty()) q += ".";
      q += scan.types[open.type_index].name;
    }
    return q;
  };

  auto fail = [&](const std::string& why, std::size_t pos) {
    scan.ok = false;
    scan.warning = path_label + ": " + why + " (line " +
                   std::to_string(lines.line_of(pos)) + ")";
    scan.types.clear();
    return scan;
  };

  int depth = 0;
  std::size_t seg_start = 0;
  std::size_t i = 0;
  const std::size_t n = masked.size();

  auto segment_head_start = [&](std::size_t from, std::size_t upto) {
    while (from < upto &&
           std::isspace(static_cast<unsigned char>(masked[from]))) {
      ++from;
    }
    return from;
  };

  auto handle_statement = [&](std::size_t from, std::size_t semi) {
    const std::size_t head_start = segment_head_start(from, semi);
    if (head_start >= semi) return;
    const std::string head = masked.substr(head_start, semi - head_start);
    const std::string clean = strip_annotations(head);
    const std::string first = first_identifier_from(clean, 0);
    if (stack.empty()) {
      if (first == "package") {
        std::string rest = trim(clean.substr(token_pos(clean, "package") + 7));
        scan.package_name = collapse_ws(rest);
      } else if (first == "import") {
        std::string rest = trim(clean.substr(token_pos(clean, "import") + 6));
        if (rest.rfind("static ", 0) == 0) rest = trim(rest.substr(7));
        scan.imports.push_back(collapse_ws(rest));
      }
      return;
    }
    if (depth != stack.back().body_depth) return;  // inside skipped construct

    RawType& owner = scan.types[stack.back().type_index];
    RawMember member;
    member.definition = trim(content.substr(head_start, semi - head_start + 1));
    member.line = lines.line_of(head_start);
    member.end_line = lines.line_of(semi);

    std::size_t eq = std::string::npos;
    int round = 0;
    for (std::size_t k = 0; k < clean.size(); ++k) {
      if (clean[k] == '(') ++round;
      if (clean[k] == ')') --round;
      if (clean[k] == '=' && round == 0) {
        eq = k;
        break;
      }
    }
    const std::string decl_part =
        eq == std::string::npos ? clean : clean.substr(0, eq);
    const std::size_t paren = decl_part.find('(');
    if (eq == std::string::npos && paren != std::string::npos) {
      // abstract/interface method declaration ending in ';'
      member.kind = model::SymbolKind::method;
      member.name = last_identifier_before(decl_part, paren);
      std::size_t close = decl_part.rfind(')');
      if (close != std::string::npos && close > paren) {
        member.params = params_signature(decl_part.substr(paren + 1, close - paren - 1));
      }
      if (member.name == owner.name) member.kind = model::SymbolKind::constructor;
    } else {
      member.kind = model::SymbolKind::field;
      member.name = last_identifier_before(decl_part, decl_part.size());
    }
    if (!member.name.empty() && !is_java_keyword(member.name)) {
      owner.members.push_back(std::move(member));
    }
  };

  while (i < n) {
    const char c = masked[i];
    if (c == '(') {
      std::size_t past = skip_parens(masked, i);
      if (past == std::string::npos) return fail("unbalanced parentheses", i);
      i = past;
      continue;
    }
    if (c == '=') {
      // declaration initializer: consume through the terminating ';'
      const char next = i + 1 < n ? masked[i + 1] : '\0';
      const char prev = i > 0 ? masked[i - 1] : '\0';
      if (next == '=' || prev == '=' || prev == '!' || prev == '<' || prev == '>') {
        ++i;
        continue;
      }
      std::size_t semi = find_statement_end(masked, i);
      if (semi == std::string::npos) return fail("unterminated declaration", i);
      handle_statement(seg_start, semi);
      i = semi + 1;
      seg_start = i;
      continue;
    }
    if (c == ';') {
      handle_statement(seg_start, i);
      ++i;
      seg_start = i;
      continue;
    }
    if (c == '{') {
      const std::size_t head_start = segment_head_start(seg_start, i);
      const std::string head = masked.substr(head_start, i - head_start);
      const std::string clean = strip_annotations(head);
      const char* type_kw = nullptr;
      for (const char* kw : {"class", "interface", "enum", "record"}) {
        if (contains_token(clean, kw)) {
          type_kw = kw;
          break;
        }
      }
      if (type_kw) {
        RawType type;
        const std::size_t kw_pos = token_pos(clean, type_kw);
        type.name = first_identifier_from(clean, kw_pos + std::string(type_kw).size());
        std::size_t ext = token_pos(clean, "extends");
        std::size_t impl = token_pos(clean, "implements");
        if (ext != std::string::npos) {
          const std::size_t stop = impl == std::string::npos ? clean.size() : impl;
          for (std::string& s : parse_super_list(clean.substr(ext + 7, stop - ext - 7))) {
            type.supers.push_back(std::move(s));
          }
        }
        if (impl != std::string::npos) {
          for (std::string& s : parse_super_list(clean.substr(impl + 10))) {
            type.supers.push_back(std::move(s));
          }
        }
        const std::string prefix = qualified_prefix();
        type.qualified = prefix.empty() ? type.name : prefix + "." + type.name;
        type.definition = collapse_ws(trim(content.substr(head_start, i - head_start)));
        type.line = lines.line_of(head_start);
        scan.types.push_back(std::move(type));
        stack.push_back(OpenType{scan.types.size() - 1, depth + 1,
                                 std::string(type_kw) == "enum"});
        ++depth;
        ++i;
        seg_start = i;
        continue;
      }
      // method/constructor body, initializer block, or annotation default —
      // record a member when the head has a parameter list, then skip the body.
      const std::size_t close = find_matching_brace(masked, i);
      if (close == std::string::npos) return fail("unbalanced braces", i);
      if (!stack.empty() && depth == stack.back().body_depth &&
          clean.find('(') != std::string::npos) {
        RawType& owner = scan.types[stack.back().type_index];
        RawMember member;
        const std::size_t paren = clean.find('(');
        member.name = last_identifier_before(clean, paren);
        member.kind = member.name == owner.name ? model::SymbolKind::constructor
                                                : model::SymbolKind::method;
        std::size_t pclose = clean.rfind(')');
        if (pclose != std::string::npos && pclose > paren) {
          member.params = params_signature(clean.substr(paren + 1, pclose - paren - 1));
        }
        member.definition = trim(content.substr(head_start, close - head_start + 1));
        member.line = lines.line_of(head_start);
        member.end_line = lines.line_of(close);
        if (!member.name.empty() && !is_java_keyword(member.name)) {
          owner.members.push_back(std::move(member));
        }
      }
      i = close + 1;
      seg_start = i;
      continue;
    }
    if (c == '}') {
      if (!stack.empty() && depth == stack.back().body_depth) {
        scan.types[stack.back().type_index].end_line = lines.line_of(i);
        stack.pop_back();
      }
      --depth;
      if (depth < 0) return fail("unbalanced braces", i);
      ++i;
      seg_start = i;
      continue;
    }
    ++i;
  }

  if (depth != 0 || !stack.empty()) return fail("unbalanced braces", n ? n - 1 : 0);
  return scan;
}

}  // namespace tgen::index
