#pragma once

#include <string>
#include <vector>

#include "tgen/index.hpp"
#include "tgen/model.hpp"

namespace tgen::workspace {

// Assertion statements recognized in a test source: calls whose callee is an
// assert* / fail / verify identifier (optionally qualified), scanned outside
// comments and literals, spanning through the closing ';'. Sites are byte
// ranges into the original source, in order of appearance.
std::vector<model::AssertionSite> extract_assertions(const std::string& test_source);

// Outline of the file declaring `symbol`: the indexed definitions of every
// top-level type in that file, joined in index order.
std::string file_skeleton(const index::SymbolIndex& index,
                          const index::IndexedSymbol& symbol);

// Resolves a method selector (qualified or simple name) against the index and
// materializes the focal-method artifact. Ambiguous selectors resolve to the
// first match in index order; NotFound when nothing matches.
model::FocalMethod select_focal(const index::SymbolIndex& index,
                                const std::string& selector,
                                const std::string& project);

// Same resolution for the initial test method; assertion sites are extracted
// from the method source. focal_id links the test to its focal method.
model::TestCase select_test(const index::SymbolIndex& index,
                            const std::string& selector,
                            const std::string& project,
                            const std::string& focal_id);

}  // namespace tgen::workspace
