#include "tgen/model.hpp"

#include <cctype>
#include <set>

#include "tgen/error.hpp"
#include "tgen/jsonio.hpp"

namespace tgen::model {

const char* to_string(TestOrigin v) {
  switch (v) {
    case TestOrigin::developer:
      return "developer";
    case TestOrigin::generated:
      return "generated";
    case TestOrigin::repaired:
      return "repaired";
  }
  return "?";
}

const char* to_string(SymbolKind v) {
  switch (v) {
    case SymbolKind::class_:
      return "class";
    case SymbolKind::constructor:
      return "constructor";
    case SymbolKind::method:
      return "method";
    case SymbolKind::field:
      return "field";
  }
  return "?";
}

const char* to_string(Provenance v) {
  switch (v) {
    case Provenance::stage1_exam:
      return "stage1_exam";
    case Provenance::stage2_query:
      return "stage2_query";
    case Provenance::stage3_error:
      return "stage3_error";
  }
  return "?";
}

const char* to_string(VpKind v) {
  switch (v) {
    case VpKind::code_element:
      return "code_element";
    case VpKind::abstract_choice:
      return "abstract_choice";
  }
  return "?";
}

const char* to_string(OracleKind v) {
  switch (v) {
    case OracleKind::primary:
      return "primary";
    case OracleKind::alternative:
      return "alternative";
  }
  return "?";
}

const char* to_string(OracleBasis v) {
  switch (v) {
    case OracleBasis::implementation_deduced:
      return "implementation_deduced";
    case OracleBasis::requirement_inferred:
      return "requirement_inferred";
  }
  return "?";
}

namespace {

[[noreturn]] void bad_enum(const char* what, const std::string& s) {
  throw Error(ErrorKind::schema_error,
              std::string("unknown ") + what + " value: " + s);
}

}  // namespace

TestOrigin test_origin_from_string(const std::string& s) {
  if (s == "developer") return TestOrigin::developer;
  if (s == "generated") return TestOrigin::generated;
  if (s == "repaired") return TestOrigin::repaired;
  bad_enum("origin", s);
}

SymbolKind symbol_kind_from_string(const std::string& s) {
  if (s == "class") return SymbolKind::class_;
  if (s == "constructor") return SymbolKind::constructor;
  if (s == "method") return SymbolKind::method;
  if (s == "field") return SymbolKind::field;
  bad_enum("symbol kind", s);
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "stage1_exam") return Provenance::stage1_exam;
  if (s == "stage2_query") return Provenance::stage2_query;
  if (s == "stage3_error") return Provenance::stage3_error;
  bad_enum("provenance", s);
}

VpKind vp_kind_from_string(const std::string& s) {
  if (s == "code_element") return VpKind::code_element;
  if (s == "abstract_choice") return VpKind::abstract_choice;
  bad_enum("vp kind", s);
}

OracleKind oracle_kind_from_string(const std::string& s) {
  if (s == "primary") return OracleKind::primary;
  if (s == "alternative") return OracleKind::alternative;
  bad_enum("oracle kind", s);
}

OracleBasis oracle_basis_from_string(const std::string& s) {
  if (s == "implementation_deduced") return OracleBasis::implementation_deduced;
  if (s == "requirement_inferred") return OracleBasis::requirement_inferred;
  bad_enum("oracle basis", s);
}

std::string canonical_vp_name(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  for (unsigned char c : raw) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    } else if (std::isspace(c) || c == '-' || c == '_' || c == '.') {
      if (!out.empty() && out.back() != '_') out.push_back('_');
    }
    // other punctuation dropped
  }
  while (!out.empty() && (out.front() == '_' || std::isdigit(
                              static_cast<unsigned char>(out.front())))) {
    out.erase(out.begin());
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  if (out.empty()) {
    throw invariant_violation("vp name canonicalizes to nothing: '" + raw + "'");
  }
  return out;
}

bool is_canonical_vp_name(const std::string& name) {
  if (name.empty()) return false;
  if (!std::islower(static_cast<unsigned char>(name.front()))) return false;
  char prev = 0;
  for (char c : name) {
    unsigned char u = static_cast<unsigned char>(c);
    if (!(std::islower(u) || std::isdigit(u) || c == '_')) return false;
    if (c == '_' && prev == '_') return false;
    prev = c;
  }
  return name.back() != '_';
}

std::string method_signature(const std::string& method_source) {
  std::size_t cut = method_source.find('{');
  if (cut == std::string::npos) cut = method_source.find(';');
  if (cut == std::string::npos) cut = method_source.size();
  return collapse_ws(method_source.substr(0, cut));
}

std::string make_symbol_id(const std::string& project, const std::string& type,
                           const std::string& member) {
  return project + "/" + type + "#" + member;
}

std::optional<IdParts> parse_symbol_id(const std::string& id) {
  const std::size_t slash = id.find('/');
  const std::size_t hash = id.find('#', slash == std::string::npos ? 0 : slash);
  if (slash == std::string::npos || hash == std::string::npos || hash < slash) {
    return std::nullopt;
  }
  IdParts parts;
  parts.project = id.substr(0, slash);
  parts.type = id.substr(slash + 1, hash - slash - 1);
  parts.member = id.substr(hash + 1);
  if (parts.type.empty()) return std::nullopt;
  return parts;
}

void validate(const FocalMethod& v) {
  if (v.id.empty()) throw invariant_violation("focal method id non-empty");
  if (v.source.empty()) throw invariant_violation("focal method source non-empty");
  const std::string sig = method_signature(v.source);
  if (sig.empty() ||
      collapse_ws(v.file_skeleton).find(sig) == std::string::npos) {
    throw invariant_violation("file_skeleton contains signature");
  }
}

void validate(const TestCase& v) {
  if (v.id.empty()) throw invariant_violation("test id non-empty");
  if (v.focal_id.empty()) throw invariant_violation("focal_id resolves");
  for (const AssertionSite& a : v.assertions) {
    if (a.offset > v.source.size() || a.length > v.source.size() - a.offset ||
        v.source.compare(a.offset, a.length, a.statement) != 0) {
      throw invariant_violation("assertion position within source");
    }
  }
}

void validate(const KnowledgeItem& v) {
  if (v.symbol.empty()) throw invariant_violation("knowledge symbol non-empty");
  if (v.kind != SymbolKind::field && v.definition.empty()) {
    throw invariant_violation("knowledge definition non-empty");
  }
}

std::vector<std::string> declared_vp_names(const ScenarioTemplate& tmpl) {
  std::vector<std::string> names;
  for (const TemplateStep& step : tmpl.steps) {
    for (const VariationPoint& vp : step.vps) names.push_back(vp.name);
  }
  return names;
}

void validate(const ScenarioTemplate& v) {
  for (std::size_t i = 0; i < v.steps.size(); ++i) {
    if (v.steps[i].step_id != static_cast<int>(i) + 1) {
      throw invariant_violation("step ids contiguous 1..n");
    }
  }
  std::size_t vp_total = 0;
  for (const TemplateStep& s : v.steps) vp_total += s.vps.size();
  if (vp_total == 0) throw invariant_violation("at least one VP");

  std::set<std::string> seen;
  for (const TemplateStep& s : v.steps) {
    if (collapse_ws(s.action).empty()) {
      throw invariant_violation("action non-empty");
    }
    for (const VariationPoint& vp : s.vps) {
      if (!is_canonical_vp_name(vp.name)) {
        throw invariant_violation("vp name canonical: '" + vp.name + "'");
      }
      if (!seen.insert(vp.name).second) {
        throw invariant_violation("vp names unique: '" + vp.name + "'");
      }
    }
  }

  for (const TemplateStep& s : v.steps) {
    for (const StepDep& d : s.deps) {
      if (d.step >= s.step_id) {
        throw invariant_violation("forward dependency: step " +
                                  std::to_string(s.step_id) + " <- STEP " +
                                  std::to_string(d.step));
      }
      if (d.step < 1 || d.step > static_cast<int>(v.steps.size())) {
        throw invariant_violation("dependency step exists: STEP " +
                                  std::to_string(d.step));
      }
      const TemplateStep& target = v.steps[static_cast<std::size_t>(d.step) - 1];
      bool declared = false;
      for (const VariationPoint& vp : target.vps) {
        if (vp.name == d.vp) {
          declared = true;
          break;
        }
      }
      if (!declared) {
        throw invariant_violation("dependency vp declared at step: '" + d.vp +
                                  "' <- STEP " + std::to_string(d.step));
      }
    }
  }
}

void validate(const ScenarioInstance& v) {
  if (v.template_ref.empty()) {
    throw invariant_violation("instance template_ref non-empty");
  }
  if (v.oracles.empty()) throw invariant_violation("oracles non-empty");
  std::size_t primaries = 0;
  for (const Oracle& o : v.oracles) {
    if (o.kind == OracleKind::primary) {
      ++primaries;
      if (o.basis != OracleBasis::implementation_deduced) {
        throw invariant_violation("primary oracle implementation_deduced");
      }
    }
  }
  if (primaries != 1) throw invariant_violation("exactly one primary oracle");
  if (v.oracles.front().kind != OracleKind::primary) {
    throw invariant_violation("primary oracle listed first");
  }
  if (v.active_oracle >= v.oracles.size()) {
    throw invariant_violation("active oracle in range");
  }
}

void validate(const RulePrompt& v) {
  if (v.scaffold.empty()) throw invariant_violation("scaffold non-empty");
  if (v.lineage && v.version <= *v.lineage) {
    throw invariant_violation("version strictly increases along lineage");
  }
}

void validate_against(const ScenarioInstance& ins, const ScenarioTemplate& tmpl) {
  validate(ins);
  const std::vector<std::string> declared = declared_vp_names(tmpl);
  const std::set<std::string> declared_set(declared.begin(), declared.end());
  for (const auto& [key, value] : ins.settings) {
    (void)value;
    if (!declared_set.count(key)) {
      throw invariant_violation("settings key declared: '" + key + "'");
    }
  }
  for (const std::string& name : declared) {
    if (!ins.settings.count(name)) {
      throw invariant_violation("settings totality: missing '" + name + "'");
    }
  }
  for (const SettingDep& d : ins.setting_deps) {
    if (!declared_set.count(d.vp)) {
      throw invariant_violation("setting dep vp declared: '" + d.vp + "'");
    }
    if (d.step < 1 || d.step > static_cast<int>(tmpl.steps.size())) {
      throw invariant_violation("setting dep step exists: STEP " +
                                std::to_string(d.step));
    }
  }
}

}  // namespace tgen::model
