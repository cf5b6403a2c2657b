#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tgen/gateway.hpp"
#include "tgen/index.hpp"
#include "tgen/jsonio.hpp"
#include "tgen/model.hpp"

namespace tgen::scenario {

// Fixed prompt scaffold for template generation. Placeholders
// {FOCAL_METHOD} {FILE_SKELETON} {INITIAL_TEST} {KNOWLEDGE} {RULES} are
// filled by build_template_prompt; section order is part of the contract:
// instruction+definition, focal method, file skeleton, initial test,
// knowledge, rules, requirements.
std::string default_scaffold();
model::RulePrompt default_rule_prompt();  // scaffold, no rules, version 0

// Assemble the generation prompt (tag "scenario.template"). Knowledge items
// are rendered in rank order (the caller's list order); items past the
// character budget are dropped lowest-rank-first with a truncation note.
// Throws ContextOverflow when knowledge exists but not even the top-ranked
// item fits the budget.
llm::CompletionRequest build_template_prompt(
    const model::FocalMethod& fm, const model::TestCase& tc,
    const std::vector<model::KnowledgeItem>& knowledge,
    const model::RulePrompt& rules, std::size_t knowledge_budget = 6000);

struct TemplateGeneration {
  model::ScenarioTemplate tmpl;
  std::vector<model::KnowledgeItem> knowledge;  // input K plus query results
  int query_rounds = 0;
};

// Generation loop: each turn yields either a query block — resolved against
// the whole index (unscoped), results appended to K — or a template block,
// parsed and validated. A query block after max_queries rounds throws
// QueryBudgetExceeded; template defects surface as ParseError /
// InvariantViolation.
TemplateGeneration generate_template(
    const model::FocalMethod& fm, const model::TestCase& tc,
    std::vector<model::KnowledgeItem> knowledge, const model::RulePrompt& rules,
    llm::Gateway& gw, const index::SymbolIndex& index, int max_queries = 3,
    std::size_t knowledge_budget = 6000);

// One intended scenario: a setting per variation point, resolved
// dependencies, and the oracle statements.
struct SettingsBundle {
  std::map<std::string, std::string> settings;
  std::vector<model::SettingDep> deps;
  std::string primary_oracle;
  std::vector<std::string> alternative_oracles;
  bool operator==(const SettingsBundle&) const = default;
};

json to_json(const SettingsBundle& bundle);
SettingsBundle bundle_from_json(const json& doc);

// Stable reference to a template artifact (content digest).
std::string template_ref(const model::ScenarioTemplate& tmpl);

// Deterministic instantiation: narrative renders each step as
// "<action> [with <vp>=<setting>, ...]" (declaration order), oracles are the
// bundle's primary followed by its alternatives, active oracle = primary.
// The bundle must agree with the template (declared VPs, totality, dep
// steps); violations throw ValidationFailure.
model::ScenarioInstance instantiate(const model::ScenarioTemplate& tmpl,
                                    const SettingsBundle& bundle);

struct CrystallizeResult {
  std::vector<SettingsBundle> bundles;           // accepted, in response order
  std::vector<model::ScenarioInstance> instances;
  std::vector<std::string> rejected;             // one reason per bad bundle
};

// One structured call (tag "scenario.bundles") asking for up to `ceiling`
// bundles; each bundle is validated semantically, bad ones are skipped and
// logged in `rejected`. Throws NoValidBundles when nothing survives.
CrystallizeResult crystallize(const model::ScenarioTemplate& tmpl,
                              const model::FocalMethod& fm,
                              const model::TestCase& tc,
                              const std::vector<model::KnowledgeItem>& knowledge,
                              llm::Gateway& gw, std::size_t ceiling = 8);

// Developer oracle selection; no choice keeps the primary active.
model::ScenarioInstance select_oracle(model::ScenarioInstance instance,
                                      std::optional<std::size_t> choice);

}  // namespace tgen::scenario
