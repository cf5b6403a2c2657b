#include "tgen/serialize.hpp"

#include <algorithm>
#include <cctype>

#include "tgen/error.hpp"

namespace tgen::model {

namespace {

const json& need(const json& obj, const char* key) {
  if (!obj.is_object()) {
    throw Error(ErrorKind::schema_error, "expected object");
  }
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorKind::schema_error, std::string("missing key: ") + key);
  }
  return *it;
}

std::string need_str(const json& obj, const char* key) {
  const json& v = need(obj, key);
  if (!v.is_string()) {
    throw Error(ErrorKind::schema_error, std::string(key) + " must be a string");
  }
  return v.get<std::string>();
}

std::size_t need_uint(const json& obj, const char* key) {
  const json& v = need(obj, key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw Error(ErrorKind::schema_error,
                std::string(key) + " must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

int need_int(const json& obj, const char* key) {
  const json& v = need(obj, key);
  if (!v.is_number_integer()) {
    throw Error(ErrorKind::schema_error, std::string(key) + " must be an integer");
  }
  return v.get<int>();
}

const json& need_array(const json& obj, const char* key) {
  const json& v = need(obj, key);
  if (!v.is_array()) {
    throw Error(ErrorKind::schema_error, std::string(key) + " must be an array");
  }
  return v;
}

json parse_doc(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorKind::parse_error, "invalid artifact document");
  }
  return doc;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

json to_json(const AssertionSite& v) {
  return json{{"statement", v.statement}, {"offset", v.offset}, {"length", v.length}};
}

AssertionSite assertion_site_from_json(const json& j) {
  AssertionSite v;
  v.statement = need_str(j, "statement");
  v.offset = need_uint(j, "offset");
  v.length = need_uint(j, "length");
  return v;
}

json to_json(const FocalMethod& v) {
  return json{{"id", v.id},
              {"source", v.source},
              {"file_skeleton", v.file_skeleton},
              {"project", v.project},
              {"commit", v.commit}};
}

FocalMethod focal_method_from_json(const json& j) {
  FocalMethod v;
  v.id = need_str(j, "id");
  v.source = need_str(j, "source");
  v.file_skeleton = need_str(j, "file_skeleton");
  v.project = need_str(j, "project");
  v.commit = need_str(j, "commit");
  return v;
}

json to_json(const TestCase& v) {
  json assertions = json::array();
  for (const AssertionSite& a : v.assertions) assertions.push_back(to_json(a));
  return json{{"id", v.id},
              {"name", v.name},
              {"source", v.source},
              {"focal_id", v.focal_id},
              {"assertions", assertions},
              {"origin", to_string(v.origin)}};
}

TestCase test_case_from_json(const json& j) {
  TestCase v;
  v.id = need_str(j, "id");
  v.name = need_str(j, "name");
  v.source = need_str(j, "source");
  v.focal_id = need_str(j, "focal_id");
  for (const json& a : need_array(j, "assertions")) {
    v.assertions.push_back(assertion_site_from_json(a));
  }
  v.origin = test_origin_from_string(need_str(j, "origin"));
  return v;
}

json to_json(const UsageSite& v) {
  return json{{"file", v.file}, {"line", v.line}};
}

UsageSite usage_site_from_json(const json& j) {
  UsageSite v;
  v.file = need_str(j, "file");
  v.line = need_uint(j, "line");
  return v;
}

json to_json(const KnowledgeItem& v) {
  json usages = json::array();
  for (const UsageSite& u : v.usages) usages.push_back(to_json(u));
  return json{{"symbol", v.symbol},
              {"kind", to_string(v.kind)},
              {"definition", v.definition},
              {"usages", usages},
              {"provenance", to_string(v.provenance)}};
}

KnowledgeItem knowledge_item_from_json(const json& j) {
  KnowledgeItem v;
  v.symbol = need_str(j, "symbol");
  v.kind = symbol_kind_from_string(need_str(j, "kind"));
  v.definition = need_str(j, "definition");
  for (const json& u : need_array(j, "usages")) {
    v.usages.push_back(usage_site_from_json(u));
  }
  v.provenance = provenance_from_string(need_str(j, "provenance"));
  return v;
}

json to_json(const VariationPoint& v) {
  return json{{"name", v.name},
              {"description", v.description},
              {"candidates", v.candidates},
              {"kind", to_string(v.kind)}};
}

VariationPoint variation_point_from_json(const json& j) {
  VariationPoint v;
  v.name = need_str(j, "name");
  v.description = need_str(j, "description");
  for (const json& c : need_array(j, "candidates")) {
    if (!c.is_string()) {
      throw Error(ErrorKind::schema_error, "candidates must be strings");
    }
    v.candidates.push_back(c.get<std::string>());
  }
  v.kind = vp_kind_from_string(need_str(j, "kind"));
  return v;
}

json to_json(const TemplateStep& v) {
  json vps = json::array();
  for (const VariationPoint& vp : v.vps) vps.push_back(to_json(vp));
  json deps = json::array();
  for (const StepDep& d : v.deps) deps.push_back(json{{"vp", d.vp}, {"step", d.step}});
  return json{{"step_id", v.step_id}, {"action", v.action}, {"vps", vps}, {"deps", deps}};
}

TemplateStep template_step_from_json(const json& j) {
  TemplateStep v;
  v.step_id = need_int(j, "step_id");
  v.action = need_str(j, "action");
  for (const json& vp : need_array(j, "vps")) {
    v.vps.push_back(variation_point_from_json(vp));
  }
  for (const json& d : need_array(j, "deps")) {
    v.deps.push_back(StepDep{need_str(d, "vp"), need_int(d, "step")});
  }
  return v;
}

json to_json(const ScenarioTemplate& v) {
  json steps = json::array();
  for (const TemplateStep& s : v.steps) steps.push_back(to_json(s));
  return json{{"focal_id", v.focal_id},
              {"steps", steps},
              {"prompt_version", v.prompt_version}};
}

ScenarioTemplate scenario_template_from_json(const json& j) {
  ScenarioTemplate v;
  v.focal_id = need_str(j, "focal_id");
  for (const json& s : need_array(j, "steps")) {
    v.steps.push_back(template_step_from_json(s));
  }
  v.prompt_version = need_str(j, "prompt_version");
  return v;
}

json to_json(const Oracle& v) {
  return json{{"kind", to_string(v.kind)},
              {"statement", v.statement},
              {"basis", to_string(v.basis)}};
}

Oracle oracle_from_json(const json& j) {
  Oracle v;
  v.kind = oracle_kind_from_string(need_str(j, "kind"));
  v.statement = need_str(j, "statement");
  v.basis = oracle_basis_from_string(need_str(j, "basis"));
  return v;
}

json to_json(const ScenarioInstance& v) {
  json settings = json::object();
  for (const auto& [key, value] : v.settings) settings[key] = value;
  json deps = json::array();
  for (const SettingDep& d : v.setting_deps) {
    deps.push_back(json{{"vp", d.vp}, {"step", d.step}, {"value", d.value}});
  }
  json oracles = json::array();
  for (const Oracle& o : v.oracles) oracles.push_back(to_json(o));
  return json{{"template_ref", v.template_ref},
              {"settings", settings},
              {"setting_deps", deps},
              {"oracles", oracles},
              {"narrative", v.narrative},
              {"active_oracle", v.active_oracle}};
}

ScenarioInstance scenario_instance_from_json(const json& j) {
  ScenarioInstance v;
  v.template_ref = need_str(j, "template_ref");
  const json& settings = need(j, "settings");
  if (!settings.is_object()) {
    throw Error(ErrorKind::schema_error, "settings must be an object");
  }
  for (auto it = settings.begin(); it != settings.end(); ++it) {
    if (!it.value().is_string()) {
      throw Error(ErrorKind::schema_error, "settings values must be strings");
    }
    v.settings[it.key()] = it.value().get<std::string>();
  }
  for (const json& d : need_array(j, "setting_deps")) {
    v.setting_deps.push_back(
        SettingDep{need_str(d, "vp"), need_int(d, "step"), need_str(d, "value")});
  }
  for (const json& o : need_array(j, "oracles")) {
    v.oracles.push_back(oracle_from_json(o));
  }
  v.narrative = need_str(j, "narrative");
  v.active_oracle = need_uint(j, "active_oracle");
  return v;
}

json to_json(const RulePrompt& v) {
  json doc{{"scaffold", v.scaffold}, {"rules", v.rules}, {"version", v.version}};
  doc["lineage"] = v.lineage ? json(*v.lineage) : json(nullptr);
  return doc;
}

RulePrompt rule_prompt_from_json(const json& j) {
  RulePrompt v;
  v.scaffold = need_str(j, "scaffold");
  for (const json& r : need_array(j, "rules")) {
    if (!r.is_string()) {
      throw Error(ErrorKind::schema_error, "rules must be strings");
    }
    v.rules.push_back(r.get<std::string>());
  }
  v.version = need_int(j, "version");
  const json& lineage = need(j, "lineage");
  if (!lineage.is_null()) {
    if (!lineage.is_number_integer()) {
      throw Error(ErrorKind::schema_error, "lineage must be an integer or null");
    }
    v.lineage = lineage.get<int>();
  }
  return v;
}

ScenarioInstance normalize_oracle_order(const ScenarioInstance& ins) {
  std::size_t primary = ins.oracles.size();
  for (std::size_t i = 0; i < ins.oracles.size(); ++i) {
    if (ins.oracles[i].kind == OracleKind::primary) {
      primary = i;
      break;
    }
  }
  if (primary == ins.oracles.size() || primary == 0) return ins;
  ScenarioInstance out = ins;
  std::rotate(out.oracles.begin(), out.oracles.begin() + static_cast<long>(primary),
              out.oracles.begin() + static_cast<long>(primary) + 1);
  if (out.active_oracle == primary) {
    out.active_oracle = 0;
  } else if (out.active_oracle < primary) {
    out.active_oracle += 1;
  }
  return out;
}

namespace {

template <typename T>
std::string serialize_with_tag(const char* tag, const T& v) {
  validate(v);
  return canonical_dump(make_envelope(tag, to_json(v)));
}

}  // namespace

std::string serialize_artifact(const FocalMethod& v) {
  return serialize_with_tag("focal_method", v);
}
std::string serialize_artifact(const TestCase& v) {
  return serialize_with_tag("test_case", v);
}
std::string serialize_artifact(const KnowledgeItem& v) {
  return serialize_with_tag("knowledge_item", v);
}
std::string serialize_artifact(const ScenarioTemplate& v) {
  return serialize_with_tag("template", v);
}
std::string serialize_artifact(const ScenarioInstance& v) {
  return serialize_with_tag("instance", normalize_oracle_order(v));
}
std::string serialize_artifact(const RulePrompt& v) {
  return serialize_with_tag("rule_prompt", v);
}

FocalMethod parse_focal_method(const std::string& text) {
  FocalMethod v = focal_method_from_json(open_envelope("focal_method", parse_doc(text)));
  validate(v);
  return v;
}

TestCase parse_test_case(const std::string& text) {
  TestCase v = test_case_from_json(open_envelope("test_case", parse_doc(text)));
  validate(v);
  return v;
}

KnowledgeItem parse_knowledge_item(const std::string& text) {
  KnowledgeItem v =
      knowledge_item_from_json(open_envelope("knowledge_item", parse_doc(text)));
  validate(v);
  return v;
}

ScenarioTemplate parse_scenario_template(const std::string& text) {
  ScenarioTemplate v =
      scenario_template_from_json(open_envelope("template", parse_doc(text)));
  validate(v);
  return v;
}

ScenarioInstance parse_scenario_instance(const std::string& text) {
  ScenarioInstance v =
      scenario_instance_from_json(open_envelope("instance", parse_doc(text)));
  validate(v);
  return v;
}

RulePrompt parse_rule_prompt(const std::string& text) {
  RulePrompt v = rule_prompt_from_json(open_envelope("rule_prompt", parse_doc(text)));
  validate(v);
  return v;
}

std::string render_template_text(const ScenarioTemplate& tmpl) {
  std::string out;
  bool first = true;
  for (const TemplateStep& step : tmpl.steps) {
    if (!first) out += "\n";
    first = false;
    out += "STEP " + std::to_string(step.step_id) + ": " + step.action + "\n";
    for (const VariationPoint& vp : step.vps) {
      out += "  VP " + vp.name + ": " + vp.description;
      if (!vp.candidates.empty()) {
        out += " [CANDIDATES: ";
        for (std::size_t i = 0; i < vp.candidates.size(); ++i) {
          if (i) out += " | ";
          out += vp.candidates[i];
        }
        out += "]";
      }
      out += "\n";
    }
    for (const StepDep& d : step.deps) {
      out += "  DEP " + d.vp + " <- STEP " + std::to_string(d.step) + "\n";
    }
  }
  return out;
}

namespace {

int parse_step_number(const std::string& token, std::size_t line_no) {
  const std::string t = trim(token);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) {
        return std::isdigit(c);
      })) {
    throw parse_error(line_no, "expected step number, found '" + t + "'");
  }
  try {
    return std::stoi(t);
  } catch (const std::exception&) {
    throw parse_error(line_no, "step number out of range: '" + t + "'");
  }
}

}  // namespace

ScenarioTemplate parse_template(const std::string& text, const std::string& focal_id,
                                const std::string& prompt_version) {
  ScenarioTemplate tmpl;
  tmpl.focal_id = focal_id;
  tmpl.prompt_version = prompt_version;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  TemplateStep* current = nullptr;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (pos > text.size() && line.empty()) break;

    const std::string stripped = trim(line);
    if (stripped.empty()) continue;  // step separator

    if (stripped.rfind("STEP ", 0) == 0) {
      std::size_t colon = stripped.find(':');
      if (colon == std::string::npos) {
        throw parse_error(line_no, "STEP line missing ':'");
      }
      TemplateStep step;
      step.step_id = parse_step_number(stripped.substr(5, colon - 5), line_no);
      step.action = trim(stripped.substr(colon + 1));
      tmpl.steps.push_back(std::move(step));
      current = &tmpl.steps.back();
      continue;
    }
    if (stripped.rfind("VP ", 0) == 0) {
      if (!current) throw parse_error(line_no, "VP line before any STEP");
      std::size_t colon = stripped.find(':');
      if (colon == std::string::npos) {
        throw parse_error(line_no, "VP line missing ':'");
      }
      VariationPoint vp;
      vp.name = canonical_vp_name(stripped.substr(3, colon - 3));
      std::string rest = trim(stripped.substr(colon + 1));
      const std::string marker = "[CANDIDATES:";
      std::size_t mark = rest.rfind(marker);
      if (mark != std::string::npos && !rest.empty() && rest.back() == ']') {
        std::string inner =
            rest.substr(mark + marker.size(),
                        rest.size() - mark - marker.size() - 1);
        vp.description = trim(rest.substr(0, mark));
        std::size_t start = 0;
        while (start <= inner.size()) {
          std::size_t bar = inner.find('|', start);
          if (bar == std::string::npos) bar = inner.size();
          std::string candidate = trim(inner.substr(start, bar - start));
          if (!candidate.empty()) vp.candidates.push_back(candidate);
          start = bar + 1;
        }
      } else {
        vp.description = rest;
      }
      current->vps.push_back(std::move(vp));
      continue;
    }
    if (stripped.rfind("DEP ", 0) == 0) {
      if (!current) throw parse_error(line_no, "DEP line before any STEP");
      const std::string arrow = "<-";
      std::size_t at = stripped.find(arrow);
      if (at == std::string::npos) {
        throw parse_error(line_no, "DEP line missing '<-'");
      }
      std::string vp_name = trim(stripped.substr(4, at - 4));
      std::string target = trim(stripped.substr(at + arrow.size()));
      if (target.rfind("STEP ", 0) != 0) {
        throw parse_error(line_no, "DEP target must be 'STEP <m>'");
      }
      StepDep dep;
      dep.vp = canonical_vp_name(vp_name);
      dep.step = parse_step_number(target.substr(5), line_no);
      current->deps.push_back(std::move(dep));
      continue;
    }
    throw parse_error(line_no, "unrecognized line: '" + stripped + "'");
  }

  validate(tmpl);
  return tmpl;
}

}  // namespace tgen::model
