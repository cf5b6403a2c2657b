#pragma once

#include <string>
#include <vector>

#include "tgen/gateway.hpp"
#include "tgen/index.hpp"
#include "tgen/jsonio.hpp"
#include "tgen/model.hpp"
#include "tgen/runner.hpp"

namespace tgen::forge {

// Deterministic generated-test name: focal method's simple name followed by
// CamelCased setting values (map order), length-capped.
std::string derive_test_name(const model::FocalMethod& fm,
                             const model::ScenarioInstance& instance);

// Renders one test from a scenario instance (tag "forge.generate"). The
// response must contain exactly one test method (imports allowed); the
// method is renamed to the derived name. origin = generated.
model::TestCase generate_test(const model::ScenarioInstance& instance,
                              const model::FocalMethod& fm,
                              const model::TestCase& tc,
                              const std::vector<model::KnowledgeItem>& knowledge,
                              llm::Gateway& gw);

struct ErrorElement {
  std::string name;
  std::string file;
  std::size_t line = 0;
  bool operator==(const ErrorElement&) const = default;
};

// Pulls program elements out of filtered runner messages: unresolved-symbol
// compiler diagnostics and the topmost frame of each stack-trace block.
// Assertion-failure messages yield nothing. Deduplicated, order preserved.
std::vector<ErrorElement> extract_error_elements(const std::string& messages);

enum class FinalStatus { passing, failing_after_max };
const char* to_string(FinalStatus status);

struct RepairAttempt {
  std::string test_source;
  runner::RunStatus outcome = runner::RunStatus::pass;
  std::string messages;
  std::vector<ErrorElement> elements;
  std::vector<model::KnowledgeItem> knowledge;
};

struct RepairRecord {
  std::vector<RepairAttempt> attempts;  // one per run; size == iterations
  FinalStatus final_status = FinalStatus::failing_after_max;
  int iterations = 0;
  std::string policy_note;  // oracle policy decisions, early-abort reasons
};

json to_json(const RepairRecord& record);

// Run/repair loop (tag "forge.repair"): run the test; on failure extract
// elements, look their positions up in the index (falling back to a name
// query), and ask for a rewritten test; stop on pass (re-run once to confirm
// stability), on max_iter, on an identical resubmission, or — per the oracle
// policy — immediately when an alternative oracle's assertion fails, which
// escalates to the developer. A primary oracle is never altered: assertion
// failures repair the setup around it.
RepairRecord repair(const model::TestCase& test,
                    const model::ScenarioInstance& instance,
                    const model::FocalMethod& fm, runner::Runner& run,
                    const index::SymbolIndex& index, llm::Gateway& gw,
                    int max_iter = 3);

}  // namespace tgen::forge
