#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tgen::model {

// All model values are immutable after construction by convention: nothing in
// the pipeline mutates a constructed artifact, so they can be shared freely
// across workers.

struct AssertionSite {
  std::string statement;  // verbatim assertion statement text
  std::size_t offset = 0; // byte offset into the owning test source
  std::size_t length = 0; // byte length of the statement in the source
  bool operator==(const AssertionSite&) const = default;
};

enum class TestOrigin { developer, generated, repaired };

struct FocalMethod {
  std::string id;  // project id + qualified class + method signature
  std::string source;
  std::string file_skeleton;  // enclosing-file outline
  std::string project;
  std::string commit;
  bool operator==(const FocalMethod&) const = default;
};

struct TestCase {
  std::string id;
  std::string name;
  std::string source;
  std::string focal_id;
  std::vector<AssertionSite> assertions;  // empty = assertion-free test
  TestOrigin origin = TestOrigin::developer;
  bool operator==(const TestCase&) const = default;
};

enum class SymbolKind { class_, constructor, method, field };
enum class Provenance { stage1_exam, stage2_query, stage3_error };

struct UsageSite {
  std::string file;
  std::size_t line = 0;
  bool operator==(const UsageSite&) const = default;
};

struct KnowledgeItem {
  std::string symbol;  // qualified name
  SymbolKind kind = SymbolKind::class_;
  std::string definition;
  std::vector<UsageSite> usages;
  Provenance provenance = Provenance::stage1_exam;
  bool operator==(const KnowledgeItem&) const = default;
};

enum class VpKind { code_element, abstract_choice };

struct VariationPoint {
  std::string name;  // canonical: lowercase words joined by underscores
  std::string description;
  std::vector<std::string> candidates;  // may be empty at template time
  VpKind kind = VpKind::abstract_choice;
  bool operator==(const VariationPoint&) const = default;
};

struct StepDep {
  std::string vp;  // VP declared in a strictly earlier step
  int step = 0;    // that earlier step's id
  bool operator==(const StepDep&) const = default;
};

struct TemplateStep {
  int step_id = 0;  // ordinal, 1-based
  std::string action;
  std::vector<VariationPoint> vps;
  std::vector<StepDep> deps;
  bool operator==(const TemplateStep&) const = default;
};

struct ScenarioTemplate {
  std::string focal_id;
  std::vector<TemplateStep> steps;
  std::string prompt_version;  // provenance: rule-prompt version used
  bool operator==(const ScenarioTemplate&) const = default;
};

enum class OracleKind { primary, alternative };
enum class OracleBasis { implementation_deduced, requirement_inferred };

struct Oracle {
  OracleKind kind = OracleKind::primary;
  std::string statement;
  OracleBasis basis = OracleBasis::implementation_deduced;
  bool operator==(const Oracle&) const = default;
};

struct SettingDep {
  std::string vp;
  int step = 0;
  std::string value;  // resolved dependency value
  bool operator==(const SettingDep&) const = default;
};

struct ScenarioInstance {
  std::string template_ref;
  std::map<std::string, std::string> settings;  // vp name -> chosen setting
  std::vector<SettingDep> setting_deps;
  std::vector<Oracle> oracles;  // primary first; exactly one primary
  std::string narrative;
  std::size_t active_oracle = 0;  // index into oracles; 0 = primary default
  bool operator==(const ScenarioInstance&) const = default;
};

struct RulePrompt {
  std::string scaffold;  // fixed prompt sections with placeholders
  std::vector<std::string> rules;
  int version = 0;
  std::optional<int> lineage;  // parent version
  bool operator==(const RulePrompt&) const = default;
};

// --- enum names (used by serialization and report rendering) ---
const char* to_string(TestOrigin v);
const char* to_string(SymbolKind v);
const char* to_string(Provenance v);
const char* to_string(VpKind v);
const char* to_string(OracleKind v);
const char* to_string(OracleBasis v);
TestOrigin test_origin_from_string(const std::string& s);
SymbolKind symbol_kind_from_string(const std::string& s);
Provenance provenance_from_string(const std::string& s);
VpKind vp_kind_from_string(const std::string& s);
OracleKind oracle_kind_from_string(const std::string& s);
OracleBasis oracle_basis_from_string(const std::string& s);

// --- canonical VP names ---
// Normalizes free-text VP names to the canonical identifier form: trimmed,
// lowercased, word separators collapsed to single underscores, punctuation
// dropped. Throws InvariantViolation when nothing identifier-like remains.
std::string canonical_vp_name(const std::string& raw);
bool is_canonical_vp_name(const std::string& name);

// Signature of a method source: text up to the body brace (or trailing
// semicolon), whitespace-collapsed. Used for the skeleton-containment check.
std::string method_signature(const std::string& method_source);

// Focal/test identifiers follow "<project>/<qualified type>#<member>".
struct IdParts {
  std::string project;
  std::string type;    // qualified declaring type
  std::string member;  // name(params) or plain member name
};
std::string make_symbol_id(const std::string& project, const std::string& type,
                           const std::string& member);
std::optional<IdParts> parse_symbol_id(const std::string& id);

// --- validation (throws Error{invariant_violation, <failing invariant>}) ---
void validate(const FocalMethod& v);
void validate(const TestCase& v);
void validate(const KnowledgeItem& v);
void validate(const ScenarioTemplate& v);
void validate(const ScenarioInstance& v);
void validate(const RulePrompt& v);

// Instance/template agreement: settings cover every declared VP exactly,
// every settings key and setting_dep names a declared VP, dep steps exist.
void validate_against(const ScenarioInstance& ins, const ScenarioTemplate& tmpl);

// All VP names declared by a template, in declaration order.
std::vector<std::string> declared_vp_names(const ScenarioTemplate& tmpl);

}  // namespace tgen::model
