#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgen/gateway.hpp"
#include "tgen/index.hpp"
#include "tgen/jsonio.hpp"
#include "tgen/model.hpp"
#include "tgen/runner.hpp"

namespace tgen::exam {

enum class OptionStatus {
  original,
  valid_wrong,
  discarded_compile,
  discarded_exec,
  discarded_passes,
};
const char* to_string(OptionStatus status);
OptionStatus option_status_from_string(const std::string& s);

struct ExamOption {
  std::string statement;
  OptionStatus status = OptionStatus::valid_wrong;
  bool operator==(const ExamOption&) const = default;
};

// One masked-oracle exam for one assertion. The first `presented` options are
// what the candidate sees (the original and every valid wrong variant,
// shuffled); discarded variants follow for audit, never shown.
struct OracleExam {
  model::TestCase base_test;
  model::AssertionSite target_assertion;
  std::vector<ExamOption> options;
  std::size_t presented = 0;
  std::size_t correct_index = 0;      // position of the original, < presented
  std::uint64_t shuffle_seed = 0;     // seed used for option shuffling
  bool operator==(const OracleExam&) const = default;
};

void validate(const OracleExam& exam);
json to_json(const OracleExam& exam);
OracleExam exam_from_json(const json& doc);
std::string serialize_exam(const OracleExam& exam);  // enveloped document
OracleExam parse_exam(const std::string& text);

// Test-method source with the target assertion replaced by `replacement`.
std::string substitute_assertion(const model::TestCase& tc,
                                 const model::AssertionSite& site,
                                 const std::string& replacement);

// File name candidates are written under in runner scratch dirs: the simple
// name of the test's declaring type, falling back to "Candidate.java".
std::string test_file_name(const model::TestCase& tc);

// Ask for up to q_max wrong variants of one assertion (tag
// "exam.wrong_oracles"). Trims, drops the original statement and duplicates;
// if nothing usable remains, issues one revision request, then throws
// ZeroCandidates.
std::vector<std::string> generate_wrong_oracles(const model::FocalMethod& fm,
                                                const model::TestCase& tc,
                                                const model::AssertionSite& site,
                                                llm::Gateway& gw,
                                                std::size_t q_max = 10);

// Substitute each variant into the base test and classify by run outcome:
// compile error, execution error, pass, or the assertion failure that keeps
// a variant.
std::vector<ExamOption> filter_candidates(const model::TestCase& tc,
                                          const model::AssertionSite& site,
                                          const std::vector<std::string>& variants,
                                          runner::Runner& run);

// Assemble the exam: shuffle original + valid_wrong with the seeded RNG,
// append discarded options. Throws when fewer than two options survive.
OracleExam build_exam(const model::TestCase& tc,
                      const model::AssertionSite& site,
                      const std::vector<ExamOption>& filtered,
                      std::uint64_t shuffle_seed);

enum class Verdict { passed, failed, exhausted };
const char* to_string(Verdict verdict);
Verdict verdict_from_string(const std::string& s);

struct TraceEvent {
  int iteration = 0;
  std::string kind;  // answer | queries | enforced_retrieval
  json detail;
  bool operator==(const TraceEvent&) const = default;
};

struct ExamOutcome {
  Verdict verdict = Verdict::exhausted;
  int iterations_used = 0;
  std::vector<model::KnowledgeItem> knowledge;
  std::vector<TraceEvent> trace;
};

json to_json(const ExamOutcome& outcome);
ExamOutcome outcome_from_json(const json& doc);

// The answer/retrieve/re-evaluate loop. Each iteration presents the masked
// test, the options, and accumulated knowledge (tag "exam.turn"); the model
// either answers or lists required information. Queries resolve inside
// neighborhood(fm, tc); a wrong answer forces retrieval of unseen
// neighborhood symbols without spending an LLM turn. Ends on the correct
// answer (passed), on max_iter (exhausted), or early (failed) when the
// answer is wrong and no unretrieved neighborhood knowledge remains.
ExamOutcome run_exam(const OracleExam& exam, llm::Gateway& gw,
                     const index::SymbolIndex& index,
                     const model::FocalMethod& fm, const model::TestCase& tc,
                     int max_iter = 3);

}  // namespace tgen::exam
