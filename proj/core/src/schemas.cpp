#include "tgen/schemas.hpp"

#include <algorithm>
#include <set>

#include "tgen/error.hpp"
#include "tgen/model.hpp"

namespace tgen::llm {

namespace {

Error malformed(const std::string& what) {
  return Error(ErrorKind::malformed_output, what);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  for (std::string& line : lines) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }
  return lines;
}

const std::set<std::string>& query_kinds() {
  static const std::set<std::string> kinds{"class",  "constructor", "method",
                                           "field",  "family",      "any"};
  return kinds;
}

json normalize_query(const std::string& kind, const std::string& name) {
  if (!query_kinds().count(kind)) {
    throw malformed("unknown query kind '" + kind + "'");
  }
  if (name.empty()) throw malformed("query name empty");
  return json{{"kind", kind}, {"name", name}};
}

}  // namespace

json extract_json(const std::string& text, char open) {
  const char close = open == '[' ? ']' : '}';
  for (std::size_t start = text.find(open); start != std::string::npos;
       start = text.find(open, start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == open) {
        ++depth;
      } else if (c == close) {
        --depth;
        if (depth == 0) {
          json doc = json::parse(text.substr(start, i - start + 1), nullptr, false);
          if (!doc.is_discarded()) return doc;
          break;  // not valid JSON; try the next opening bracket
        }
      }
    }
  }
  throw malformed(std::string("no parsable JSON '") + open + "' value in response");
}

Schema string_list_schema(const std::string& id, const std::string& item_noun) {
  Schema schema;
  schema.id = id;
  schema.corrective_hint =
      "Your previous output did not conform. Respond with only a JSON array of " +
      item_noun + " strings, e.g. [\"...\", \"...\"].";
  schema.parse = [](const std::string& text) {
    json arr = extract_json(text, '[');
    json out = json::array();
    for (const json& item : arr) {
      if (!item.is_string()) throw malformed("list items must be strings");
      out.push_back(trim(item.get<std::string>()));
    }
    return out;
  };
  return schema;
}

Schema exam_turn_schema(std::size_t option_count) {
  Schema schema;
  schema.id = "exam.turn";
  schema.corrective_hint =
      "Your previous output did not conform. Respond with only a JSON object: "
      "either {\"answer\": <option number>} or "
      "{\"queries\": [{\"kind\": \"class|constructor|method|field|family\", "
      "\"name\": \"<symbol>\"}]}.";
  schema.parse = [option_count](const std::string& text) {
    json obj = extract_json(text, '{');
    const bool has_answer = obj.contains("answer");
    const bool has_queries = obj.contains("queries");
    if (has_answer == has_queries) {
      throw malformed("exam turn needs exactly one of answer/queries");
    }
    if (has_answer) {
      const json& a = obj["answer"];
      if (!a.is_number_integer()) throw malformed("answer must be an integer");
      const long long k = a.get<long long>();
      if (k < 1 || k > static_cast<long long>(option_count)) {
        throw malformed("answer " + std::to_string(k) + " outside 1.." +
                        std::to_string(option_count));
      }
      return json{{"answer_index", static_cast<std::size_t>(k - 1)}};
    }
    const json& queries = obj["queries"];
    if (!queries.is_array() || queries.empty()) {
      throw malformed("queries must be a non-empty array");
    }
    json out = json::array();
    for (const json& q : queries) {
      if (!q.is_object() || !q.contains("name") || !q["name"].is_string()) {
        throw malformed("each query needs a string name");
      }
      std::string kind = "any";
      if (q.contains("kind")) {
        if (!q["kind"].is_string()) throw malformed("query kind must be a string");
        kind = trim(q["kind"].get<std::string>());
      }
      out.push_back(normalize_query(kind, trim(q["name"].get<std::string>())));
    }
    return json{{"queries", out}};
  };
  return schema;
}

Schema scenario_turn_schema() {
  Schema schema;
  schema.id = "scenario.turn";
  schema.corrective_hint =
      "Your previous output did not conform. Either output a line 'QUERIES:' "
      "followed by '- <kind> <name>' lines, or a line 'TEMPLATE:' followed by "
      "the template in the STEP/VP/DEP format.";
  schema.parse = [](const std::string& text) {
    const std::vector<std::string> lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::string stripped = trim(lines[i]);
      if (stripped.rfind("TEMPLATE:", 0) == 0) {
        std::string body = trim(stripped.substr(9));
        std::string rest;
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
          rest += lines[j];
          rest += "\n";
        }
        if (!body.empty()) rest = body + "\n" + rest;
        if (trim(rest).empty()) throw malformed("TEMPLATE: block is empty");
        return json{{"template", rest}};
      }
      if (stripped.rfind("QUERIES:", 0) == 0) {
        json queries = json::array();
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
          const std::string q = trim(lines[j]);
          if (q.empty()) {
            if (!queries.empty()) break;
            continue;
          }
          if (q.front() != '-') break;
          std::string body = trim(q.substr(1));
          std::size_t space = body.find_first_of(" \t");
          if (space == std::string::npos) {
            queries.push_back(normalize_query("any", body));
          } else {
            std::string kind = body.substr(0, space);
            std::string name = trim(body.substr(space + 1));
            if (query_kinds().count(kind)) {
              queries.push_back(normalize_query(kind, name));
            } else {
              queries.push_back(normalize_query("any", trim(body)));
            }
          }
        }
        if (queries.empty()) throw malformed("QUERIES: block lists no queries");
        return json{{"queries", queries}};
      }
    }
    throw malformed("response has neither TEMPLATE: nor QUERIES: block");
  };
  return schema;
}

namespace {

json parse_bundles(const std::string& text) {
  json arr = extract_json(text, '[');
  json out = json::array();
  for (const json& b : arr) {
    if (!b.is_object()) throw malformed("bundle must be an object");
    if (!b.contains("settings") || !b["settings"].is_object()) {
      throw malformed("bundle needs a settings object");
    }
    json settings = json::object();
    for (auto it = b["settings"].begin(); it != b["settings"].end(); ++it) {
      if (!it.value().is_string()) {
        throw malformed("settings values must be strings");
      }
      if (it.key().empty()) throw malformed("settings keys must be non-empty");
      settings[it.key()] = it.value();
    }
    if (!b.contains("primary_oracle") || !b["primary_oracle"].is_string() ||
        trim(b["primary_oracle"].get<std::string>()).empty()) {
      throw malformed("bundle needs a non-empty primary_oracle string");
    }
    json deps = json::array();
    if (b.contains("deps")) {
      if (!b["deps"].is_array()) throw malformed("deps must be an array");
      for (const json& d : b["deps"]) {
        if (!d.is_object() || !d.contains("vp") || !d["vp"].is_string() ||
            !d.contains("step") || !d["step"].is_number_integer()) {
          throw malformed("each dep needs vp (string) and step (integer)");
        }
        json dep{{"vp", d["vp"]}, {"step", d["step"]}};
        dep["value"] = d.contains("value") && d["value"].is_string()
                           ? d["value"]
                           : json("");
        deps.push_back(dep);
      }
    }
    json alternatives = json::array();
    if (b.contains("alternative_oracles")) {
      if (!b["alternative_oracles"].is_array()) {
        throw malformed("alternative_oracles must be an array");
      }
      for (const json& a : b["alternative_oracles"]) {
        if (!a.is_string()) throw malformed("alternative oracles must be strings");
        alternatives.push_back(trim(a.get<std::string>()));
      }
    }
    out.push_back(json{{"settings", settings},
                       {"deps", deps},
                       {"primary_oracle", trim(b["primary_oracle"].get<std::string>())},
                       {"alternative_oracles", alternatives}});
  }
  return out;
}

}  // namespace

Schema bundles_schema() {
  Schema schema;
  schema.id = "scenario.bundles";
  schema.corrective_hint =
      "Your previous output did not conform. Respond with only a JSON array of "
      "bundles: [{\"settings\": {\"<vp>\": \"<setting>\"}, \"deps\": "
      "[{\"vp\": \"...\", \"step\": 1, \"value\": \"...\"}], "
      "\"primary_oracle\": \"...\", \"alternative_oracles\": [\"...\"]}].";
  schema.parse = [](const std::string& text) { return parse_bundles(text); };
  return schema;
}

Schema bundles_schema_strict(std::vector<std::string> declared_vps) {
  Schema schema = bundles_schema();
  schema.id = "scenario.bundles.strict";
  std::string vps;
  for (const std::string& name : declared_vps) {
    if (!vps.empty()) vps += ", ";
    vps += name;
  }
  schema.corrective_hint +=
      " Settings keys must be exactly the declared variation points: " + vps + ".";
  std::set<std::string> declared(declared_vps.begin(), declared_vps.end());
  schema.parse = [declared](const std::string& text) {
    json bundles = parse_bundles(text);
    for (const json& b : bundles) {
      for (auto it = b["settings"].begin(); it != b["settings"].end(); ++it) {
        if (!declared.count(it.key())) {
          throw malformed("settings key '" + it.key() +
                          "' is not a declared variation point");
        }
      }
    }
    return bundles;
  };
  return schema;
}

Schema directives_schema() {
  Schema schema;
  schema.id = "tuning.directives";
  schema.corrective_hint =
      "Your previous output did not conform. Respond with only a JSON array of "
      "directives: [{\"op\": \"add|modify|delete\", \"index\": <rule index>, "
      "\"text\": \"<rule text>\", \"generalized\": false}]. 'add' needs text; "
      "'modify' needs index and text; 'delete' needs index.";
  schema.parse = [](const std::string& text) {
    json arr = extract_json(text, '[');
    json out = json::array();
    for (const json& d : arr) {
      if (!d.is_object() || !d.contains("op") || !d["op"].is_string()) {
        throw malformed("directive needs a string op");
      }
      const std::string op = d["op"].get<std::string>();
      if (op != "add" && op != "modify" && op != "delete") {
        throw malformed("directive op must be add, modify, or delete");
      }
      json norm{{"op", op}, {"generalized", false}};
      if (d.contains("generalized")) {
        if (!d["generalized"].is_boolean()) {
          throw malformed("generalized must be a boolean");
        }
        norm["generalized"] = d["generalized"];
      }
      if (op == "add" || op == "modify") {
        if (!d.contains("text") || !d["text"].is_string() ||
            trim(d["text"].get<std::string>()).empty()) {
          throw malformed(op + " directive needs non-empty text");
        }
        norm["text"] = trim(d["text"].get<std::string>());
      }
      if (op == "modify" || op == "delete") {
        if (!d.contains("index") || !d["index"].is_number_integer() ||
            d["index"].get<long long>() < 0) {
          throw malformed(op + " directive needs a non-negative index");
        }
        norm["index"] = d["index"];
      }
      out.push_back(norm);
    }
    return out;
  };
  return schema;
}

Schema judge_verdict_schema(std::vector<std::string> valid_ids) {
  Schema schema;
  schema.id = "judge.verdict";
  schema.corrective_hint =
      "Your previous output did not conform. Respond with exactly one line: "
      "'MATCH: yes; tests: [id1, id2]' or 'MATCH: no'.";
  std::set<std::string> pool(valid_ids.begin(), valid_ids.end());
  schema.parse = [pool](const std::string& text) {
    const std::string lower = to_lower(text);
    std::size_t pos = lower.find("match:");
    if (pos == std::string::npos) throw malformed("no MATCH: verdict found");
    std::size_t cursor = pos + 6;
    while (cursor < lower.size() &&
           (lower[cursor] == ' ' || lower[cursor] == '\t')) {
      ++cursor;
    }
    bool match = false;
    if (lower.compare(cursor, 3, "yes") == 0) {
      match = true;
    } else if (lower.compare(cursor, 2, "no") == 0) {
      match = false;
    } else {
      throw malformed("verdict must be yes or no");
    }
    json tests = json::array();
    if (match) {
      std::size_t tpos = lower.find("tests:", cursor);
      if (tpos == std::string::npos) {
        throw malformed("yes verdict must cite tests");
      }
      std::size_t lb = text.find('[', tpos);
      std::size_t rb = lb == std::string::npos ? std::string::npos
                                               : text.find(']', lb);
      if (lb == std::string::npos || rb == std::string::npos) {
        throw malformed("tests list must be bracketed");
      }
      std::string inner = text.substr(lb + 1, rb - lb - 1);
      std::size_t start = 0;
      while (start <= inner.size()) {
        std::size_t comma = inner.find(',', start);
        if (comma == std::string::npos) comma = inner.size();
        std::string id = trim(inner.substr(start, comma - start));
        if (!id.empty()) tests.push_back(id);
        start = comma + 1;
      }
      if (tests.empty()) throw malformed("yes verdict cites no tests");
      if (!pool.empty()) {
        for (const json& id : tests) {
          if (!pool.count(id.get<std::string>())) {
            throw malformed("cited test '" + id.get<std::string>() +
                            "' is not in the candidate pool");
          }
        }
      }
    }
    return json{{"match", match}, {"tests", tests}};
  };
  return schema;
}

Schema vp_match_schema() {
  Schema schema;
  schema.id = "tuning.vp_match";
  schema.corrective_hint =
      "Your previous output did not conform. Respond with only a JSON array of "
      "pairs: [{\"predicted\": \"<vp name>\", \"truth\": \"<vp name>\"}].";
  schema.parse = [](const std::string& text) {
    json arr = extract_json(text, '[');
    json out = json::array();
    for (const json& p : arr) {
      if (!p.is_object() || !p.contains("predicted") || !p.contains("truth") ||
          !p["predicted"].is_string() || !p["truth"].is_string()) {
        throw malformed("each pair needs predicted and truth strings");
      }
      try {
        out.push_back(json{
            {"predicted", model::canonical_vp_name(p["predicted"].get<std::string>())},
            {"truth", model::canonical_vp_name(p["truth"].get<std::string>())}});
      } catch (const Error& e) {
        throw malformed("pair names not canonicalizable: " + e.message());
      }
    }
    return out;
  };
  return schema;
}

}  // namespace tgen::llm
