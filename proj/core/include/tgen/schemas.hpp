#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tgen/gateway.hpp"

namespace tgen::llm {

// Registered output shapes for complete_structured. Each factory returns a
// Schema whose parse() yields a normalized json value; parse throws on any
// shape violation so the gateway can issue its one corrective retry.

// JSON array of non-empty strings (wrong-oracle candidates, plain lists).
Schema string_list_schema(const std::string& id, const std::string& item_noun);

// One exam turn: either {"answer": k} with 1 <= k <= option_count,
// normalized to {"answer_index": k-1}, or {"queries": [{"kind","name"}…]}.
Schema exam_turn_schema(std::size_t option_count);

// One template-generation turn: either a QUERIES: block of "- <kind> <name>"
// lines, normalized to {"queries": […]}, or a TEMPLATE: marker whose
// remainder is returned raw as {"template": "<text>"} for the grammar parser.
Schema scenario_turn_schema();

// Array of settings bundles:
//   [{"settings": {vp: setting}, "deps": [{"vp","step","value"}],
//     "primary_oracle": "...", "alternative_oracles": ["..."]}]
// Shape checks only; per-bundle semantic validation happens in crystallize.
Schema bundles_schema();

// Strict variant additionally bound to the declared VP names: any settings
// key outside the declared set is a schema violation.
Schema bundles_schema_strict(std::vector<std::string> declared_vps);

// Rule-edit directives from feedback synthesis:
//   [{"op": "add"|"modify"|"delete", "index": i, "text": "...",
//     "generalized": bool}]
Schema directives_schema();

// Judge verdict line "MATCH: yes; tests: [t1, t3]" or "MATCH: no",
// normalized to {"match": bool, "tests": [ids]}. When valid_ids is
// non-empty a yes-verdict must cite only ids from that pool, at least one.
Schema judge_verdict_schema(std::vector<std::string> valid_ids = {});

// VP-match pairs from the online evaluator's judge:
//   [{"predicted": name, "truth": name}] (names canonicalized).
Schema vp_match_schema();

// Helper shared by schemas: extract the first balanced JSON value of the
// given opening bracket from free text (LLM responses often wrap JSON in
// prose or code fences). Throws MalformedOutput when none parses.
json extract_json(const std::string& text, char open);

}  // namespace tgen::llm
