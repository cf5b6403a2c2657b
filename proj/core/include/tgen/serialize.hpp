#pragma once

#include <string>

#include "tgen/jsonio.hpp"
#include "tgen/model.hpp"

namespace tgen::model {

// JSON encodings of the core types. Encoders assume validated values;
// decoders throw SchemaError on shape problems (missing keys, wrong types).
json to_json(const AssertionSite& v);
json to_json(const FocalMethod& v);
json to_json(const TestCase& v);
json to_json(const UsageSite& v);
json to_json(const KnowledgeItem& v);
json to_json(const VariationPoint& v);
json to_json(const TemplateStep& v);
json to_json(const ScenarioTemplate& v);
json to_json(const Oracle& v);
json to_json(const ScenarioInstance& v);
json to_json(const RulePrompt& v);

AssertionSite assertion_site_from_json(const json& j);
FocalMethod focal_method_from_json(const json& j);
TestCase test_case_from_json(const json& j);
UsageSite usage_site_from_json(const json& j);
KnowledgeItem knowledge_item_from_json(const json& j);
VariationPoint variation_point_from_json(const json& j);
TemplateStep template_step_from_json(const json& j);
ScenarioTemplate scenario_template_from_json(const json& j);
Oracle oracle_from_json(const json& j);
ScenarioInstance scenario_instance_from_json(const json& j);
RulePrompt rule_prompt_from_json(const json& j);

// Canonical artifact documents: enveloped, key-ordered, deterministic bytes.
// serialize_artifact validates first (InvariantViolation on a bad value);
// the ScenarioInstance overload additionally normalizes oracle order so the
// primary is listed first (active_oracle remapped alongside).
std::string serialize_artifact(const FocalMethod& v);
std::string serialize_artifact(const TestCase& v);
std::string serialize_artifact(const KnowledgeItem& v);
std::string serialize_artifact(const ScenarioTemplate& v);
std::string serialize_artifact(const ScenarioInstance& v);
std::string serialize_artifact(const RulePrompt& v);

FocalMethod parse_focal_method(const std::string& text);
TestCase parse_test_case(const std::string& text);
KnowledgeItem parse_knowledge_item(const std::string& text);
ScenarioTemplate parse_scenario_template(const std::string& text);
ScenarioInstance parse_scenario_instance(const std::string& text);
RulePrompt parse_rule_prompt(const std::string& text);

// Returns a copy with the primary oracle first (alternatives keep their
// relative order) and active_oracle remapped to track the same oracle.
ScenarioInstance normalize_oracle_order(const ScenarioInstance& ins);

// --- line-oriented template text form (human-diffable; prompts embed it) ---
// Grammar:
//   STEP <n>: <action>
//     VP <name>: <description> [CANDIDATES: a | b | c]
//     DEP <vp_name> <- STEP <m>
// with one blank line between steps. The structured JSON form is
// authoritative; the text form does not carry focal_id, prompt_version, or
// VP kind (kind defaults to abstract_choice on parse).
std::string render_template_text(const ScenarioTemplate& tmpl);
ScenarioTemplate parse_template(const std::string& text,
                                const std::string& focal_id = "",
                                const std::string& prompt_version = "");

}  // namespace tgen::model
