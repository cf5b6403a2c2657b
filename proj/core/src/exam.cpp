#include "tgen/exam.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "tgen/error.hpp"
#include "tgen/java_scan.hpp"
#include "tgen/schemas.hpp"
#include "tgen/serialize.hpp"

namespace tgen::exam {

const char* to_string(OptionStatus status) {
  switch (status) {
    case OptionStatus::original: return "original";
    case OptionStatus::valid_wrong: return "valid_wrong";
    case OptionStatus::discarded_compile: return "discarded_compile";
    case OptionStatus::discarded_exec: return "discarded_exec";
    case OptionStatus::discarded_passes: return "discarded_passes";
  }
  return "original";
}

OptionStatus option_status_from_string(const std::string& s) {
  if (s == "original") return OptionStatus::original;
  if (s == "valid_wrong") return OptionStatus::valid_wrong;
  if (s == "discarded_compile") return OptionStatus::discarded_compile;
  if (s == "discarded_exec") return OptionStatus::discarded_exec;
  if (s == "discarded_passes") return OptionStatus::discarded_passes;
  throw Error(ErrorKind::schema_error, "unknown option status: " + s);
}

const char* to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::passed: return "passed";
    case Verdict::failed: return "failed";
    case Verdict::exhausted: return "exhausted";
  }
  return "exhausted";
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "passed") return Verdict::passed;
  if (s == "failed") return Verdict::failed;
  if (s == "exhausted") return Verdict::exhausted;
  throw Error(ErrorKind::schema_error, "unknown exam verdict: " + s);
}

static bool site_matches(const model::TestCase& tc,
                         const model::AssertionSite& site) {
  return site.length > 0 && site.offset + site.length <= tc.source.size() &&
         tc.source.compare(site.offset, site.length, site.statement) == 0;
}

void validate(const OracleExam& exam) {
  if (exam.base_test.id.empty()) {
    throw invariant_violation("base test has an id");
  }
  if (!site_matches(exam.base_test, exam.target_assertion)) {
    throw invariant_violation("target assertion matches base test source");
  }
  if (exam.presented < 2) {
    throw invariant_violation("at least two options");
  }
  if (exam.presented > exam.options.size()) {
    throw invariant_violation("presented within options");
  }
  if (exam.correct_index >= exam.presented) {
    throw invariant_violation("correct index within presented options");
  }
  std::size_t originals = 0;
  for (std::size_t i = 0; i < exam.options.size(); ++i) {
    const OptionStatus st = exam.options[i].status;
    if (st == OptionStatus::original) ++originals;
    const bool in_presented = i < exam.presented;
    const bool presentable =
        st == OptionStatus::original || st == OptionStatus::valid_wrong;
    if (in_presented && !presentable) {
      throw invariant_violation("presented options are original or valid wrong");
    }
    if (!in_presented && presentable) {
      throw invariant_violation("discarded options follow presented options");
    }
  }
  if (originals != 1 ||
      exam.options[exam.correct_index].status != OptionStatus::original) {
    throw invariant_violation("exactly one original option");
  }
}

json to_json(const OracleExam& exam) {
  json options = json::array();
  for (const ExamOption& o : exam.options) {
    options.push_back({{"statement", o.statement}, {"status", to_string(o.status)}});
  }
  return json{{"base_test", model::to_json(exam.base_test)},
              {"target_assertion", model::to_json(exam.target_assertion)},
              {"options", options},
              {"presented", exam.presented},
              {"correct_index", exam.correct_index},
              {"shuffle_seed", exam.shuffle_seed}};
}

OracleExam exam_from_json(const json& doc) {
  OracleExam exam;
  try {
    exam.base_test = model::test_case_from_json(doc.at("base_test"));
    exam.target_assertion =
        model::assertion_site_from_json(doc.at("target_assertion"));
    for (const json& o : doc.at("options")) {
      exam.options.push_back(
          {o.at("statement").get<std::string>(),
           option_status_from_string(o.at("status").get<std::string>())});
    }
    exam.presented = doc.at("presented").get<std::size_t>();
    exam.correct_index = doc.at("correct_index").get<std::size_t>();
    exam.shuffle_seed = doc.at("shuffle_seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema_error, std::string("exam: ") + e.what());
  }
  return exam;
}

std::string serialize_exam(const OracleExam& exam) {
  validate(exam);
  return canonical_dump(make_envelope("exam", to_json(exam)));
}

OracleExam parse_exam(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse_error, std::string("exam: ") + e.what());
  }
  OracleExam exam = exam_from_json(open_envelope("exam", doc));
  validate(exam);
  return exam;
}

std::string substitute_assertion(const model::TestCase& tc,
                                 const model::AssertionSite& site,
                                 const std::string& replacement) {
  if (!site_matches(tc, site)) {
    throw invariant_violation("target assertion matches base test source");
  }
  return tc.source.substr(0, site.offset) + replacement +
         tc.source.substr(site.offset + site.length);
}

std::string test_file_name(const model::TestCase& tc) {
  if (auto parts = model::parse_symbol_id(tc.id)) {
    const std::string& type = parts->type;
    const std::size_t dot = type.rfind('.');
    const std::string simple =
        dot == std::string::npos ? type : type.substr(dot + 1);
    if (!simple.empty()) return simple + ".java";
  }
  return "Candidate.java";
}

namespace {

std::vector<std::string> usable_variants(const json& items,
                                         const std::string& original,
                                         std::size_t q_max) {
  const std::string canon_original = collapse_ws(original);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const json& item : items) {
    const std::string text = item.get<std::string>();
    const std::string canon = collapse_ws(text);
    if (canon.empty() || canon == canon_original) continue;
    if (!seen.insert(canon).second) continue;
    out.push_back(text);
    if (out.size() >= q_max) break;
  }
  return out;
}

}  // namespace

std::vector<std::string> generate_wrong_oracles(const model::FocalMethod& fm,
                                                const model::TestCase& tc,
                                                const model::AssertionSite& site,
                                                llm::Gateway& gw,
                                                std::size_t q_max) {
  std::ostringstream prompt;
  prompt << "Focal method:\n```java\n" << fm.source << "\n```\n\n";
  prompt << "Unit test:\n```java\n" << tc.source << "\n```\n\n";
  prompt << "Target assertion:\n" << site.statement << "\n\n";
  prompt << "Produce up to " << q_max
         << " WRONG variants of the target assertion. Each variant must be a "
            "complete assertion statement that could compile in place of the "
            "original but asserts something incorrect about this test. Reply "
            "with a JSON array of strings and nothing else.";

  llm::CompletionRequest request;
  request.temperature = 0.0;
  request.tag = "exam.wrong_oracles";
  request.messages.push_back(
      {llm::Role::system,
       "You construct deliberately wrong test oracles for a recovery exam."});
  request.messages.push_back({llm::Role::user, prompt.str()});

  const llm::Schema schema =
      llm::string_list_schema("exam.wrong_oracles", "assertion variant");
  json items = gw.complete_structured(request, schema);
  std::vector<std::string> variants =
      usable_variants(items, site.statement, q_max);
  if (!variants.empty()) return variants;

  // One revision round: everything produced was unusable.
  llm::CompletionRequest revision = request;
  revision.messages.push_back({llm::Role::assistant, items.dump()});
  revision.messages.push_back(
      {llm::Role::user,
       "Every candidate was empty, a duplicate, or identical to the original "
       "assertion. Revise your output: produce genuinely different wrong "
       "variants, as a JSON array of strings."});
  items = gw.complete_structured(revision, schema);
  variants = usable_variants(items, site.statement, q_max);
  if (variants.empty()) {
    throw Error(ErrorKind::zero_candidates,
                "no usable wrong-oracle variants after revision for " + tc.id);
  }
  return variants;
}

std::vector<ExamOption> filter_candidates(const model::TestCase& tc,
                                          const model::AssertionSite& site,
                                          const std::vector<std::string>& variants,
                                          runner::Runner& run) {
  const std::string file_name = test_file_name(tc);
  std::vector<ExamOption> out;
  for (const std::string& variant : variants) {
    const std::string source = substitute_assertion(tc, site, variant);
    const runner::RunOutcome outcome = run.run_candidate(source, file_name);
    OptionStatus status = OptionStatus::discarded_exec;
    switch (outcome.status) {
      case runner::RunStatus::compile_error:
        status = OptionStatus::discarded_compile;
        break;
      case runner::RunStatus::execution_error:
        status = OptionStatus::discarded_exec;
        break;
      case runner::RunStatus::pass:
        status = OptionStatus::discarded_passes;
        break;
      case runner::RunStatus::assertion_failure:
        status = OptionStatus::valid_wrong;
        break;
    }
    out.push_back({variant, status});
  }
  return out;
}

OracleExam build_exam(const model::TestCase& tc,
                      const model::AssertionSite& site,
                      const std::vector<ExamOption>& filtered,
                      std::uint64_t shuffle_seed) {
  OracleExam exam;
  exam.base_test = tc;
  exam.target_assertion = site;
  exam.shuffle_seed = shuffle_seed;

  std::vector<ExamOption> presented;
  presented.push_back({site.statement, OptionStatus::original});
  for (const ExamOption& o : filtered) {
    if (o.status == OptionStatus::valid_wrong) presented.push_back(o);
  }
  std::mt19937_64 rng(shuffle_seed);
  for (std::size_t i = presented.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(presented[i - 1], presented[j]);
  }
  exam.presented = presented.size();
  for (std::size_t i = 0; i < presented.size(); ++i) {
    if (presented[i].status == OptionStatus::original) exam.correct_index = i;
  }
  exam.options = std::move(presented);
  for (const ExamOption& o : filtered) {
    if (o.status != OptionStatus::valid_wrong) exam.options.push_back(o);
  }
  validate(exam);
  return exam;
}

json to_json(const ExamOutcome& outcome) {
  json knowledge = json::array();
  for (const model::KnowledgeItem& item : outcome.knowledge) {
    knowledge.push_back(model::to_json(item));
  }
  json trace = json::array();
  for (const TraceEvent& e : outcome.trace) {
    trace.push_back(
        {{"iteration", e.iteration}, {"kind", e.kind}, {"detail", e.detail}});
  }
  return json{{"verdict", to_string(outcome.verdict)},
              {"iterations_used", outcome.iterations_used},
              {"knowledge", knowledge},
              {"trace", trace}};
}

ExamOutcome outcome_from_json(const json& doc) {
  ExamOutcome outcome;
  try {
    outcome.verdict = verdict_from_string(doc.at("verdict").get<std::string>());
    outcome.iterations_used = doc.at("iterations_used").get<int>();
    for (const json& item : doc.at("knowledge")) {
      outcome.knowledge.push_back(model::knowledge_item_from_json(item));
    }
    for (const json& e : doc.at("trace")) {
      outcome.trace.push_back({e.at("iteration").get<int>(),
                               e.at("kind").get<std::string>(),
                               e.at("detail")});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema_error,
                std::string("exam outcome: ") + e.what());
  }
  return outcome;
}

namespace {

std::string render_knowledge(const std::vector<model::KnowledgeItem>& items) {
  if (items.empty()) return "none yet\n";
  std::ostringstream out;
  for (const model::KnowledgeItem& item : items) {
    out << "SYMBOL " << item.symbol << " (" << model::to_string(item.kind)
        << ")\n" << item.definition << "\n";
    if (!item.usages.empty()) {
      out << "used at:";
      for (const model::UsageSite& u : item.usages) {
        out << " " << u.file << ":" << u.line;
      }
      out << "\n";
    }
  }
  return out.str();
}

std::set<std::string> identifier_set(const std::string& source) {
  std::set<std::string> out;
  for (std::string& id : index::java_identifiers(source)) {
    out.insert(std::move(id));
  }
  return out;
}

// Unretrieved neighborhood symbols, ranked: referenced by the assertion,
// then by the focal method, then by the test, then the rest; qualified-name
// order within a rank.
std::vector<const index::IndexedSymbol*> enforced_candidates(
    const index::Neighborhood& nb, const std::set<std::string>& have,
    const index::SymbolIndex& index, const std::set<std::string>& assert_ids,
    const std::set<std::string>& fm_ids, const std::set<std::string>& tc_ids) {
  std::vector<std::pair<int, const index::IndexedSymbol*>> ranked;
  for (const std::string& qualified : nb.allowed) {
    if (have.count(qualified)) continue;
    const index::IndexedSymbol* sym = index.find(qualified);
    if (!sym) continue;
    int rank = 3;
    if (assert_ids.count(sym->simple)) {
      rank = 0;
    } else if (fm_ids.count(sym->simple)) {
      rank = 1;
    } else if (tc_ids.count(sym->simple)) {
      rank = 2;
    }
    ranked.emplace_back(rank, sym);
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first < b.first;
              return a.second->qualified < b.second->qualified;
            });
  std::vector<const index::IndexedSymbol*> out;
  for (const auto& [rank, sym] : ranked) out.push_back(sym);
  return out;
}

constexpr std::size_t kEnforceBatch = 3;

}  // namespace

ExamOutcome run_exam(const OracleExam& exam, llm::Gateway& gw,
                     const index::SymbolIndex& index,
                     const model::FocalMethod& fm, const model::TestCase& tc,
                     int max_iter) {
  validate(exam);
  const index::Neighborhood nb = index::neighborhood(fm, tc, index);
  const std::set<std::string> assert_ids =
      identifier_set(exam.target_assertion.statement);
  const std::set<std::string> fm_ids = identifier_set(fm.source);
  const std::set<std::string> tc_ids = identifier_set(tc.source);

  const std::string masked =
      substitute_assertion(exam.base_test, exam.target_assertion,
                           "/* MASKED ORACLE */");

  ExamOutcome outcome;
  std::set<std::string> have;
  auto absorb = [&](const model::KnowledgeItem& item) {
    if (have.insert(item.symbol).second) outcome.knowledge.push_back(item);
  };

  for (int iter = 1; iter <= max_iter; ++iter) {
    outcome.iterations_used = iter;

    std::ostringstream prompt;
    prompt << "Focal method:\n```java\n" << fm.source << "\n```\n\n";
    prompt << "Test with its oracle masked:\n```java\n" << masked << "\n```\n\n";
    prompt << "Options:\n";
    for (std::size_t i = 0; i < exam.presented; ++i) {
      prompt << (i + 1) << ". " << exam.options[i].statement << "\n";
    }
    prompt << "\nKnown project information:\n" << render_knowledge(outcome.knowledge);
    prompt << "\nExactly one option is the original assertion. If you can "
              "identify it, reply {\"answer\": <option number>}. If you need "
              "definitions of project symbols first, do not make a choice; "
              "reply {\"queries\": [{\"kind\": "
              "\"class|constructor|method|field|family|any\", \"name\": "
              "\"<symbol>\"}]}.";

    llm::CompletionRequest request;
    request.temperature = 0.0;
    request.tag = "exam.turn";
    request.messages.push_back(
        {llm::Role::system,
         "You are recovering the original oracle of a Java unit test from "
         "wrong alternatives."});
    request.messages.push_back({llm::Role::user, prompt.str()});

    const json turn =
        gw.complete_structured(request, llm::exam_turn_schema(exam.presented));

    if (turn.contains("answer_index")) {
      const std::size_t answer = turn["answer_index"].get<std::size_t>();
      const bool correct = answer == exam.correct_index;
      outcome.trace.push_back(
          {iter, "answer",
           json{{"answer_index", answer}, {"correct", correct}}});
      if (correct) {
        outcome.verdict = Verdict::passed;
        return outcome;
      }
      if (iter < max_iter) {
        const auto candidates = enforced_candidates(nb, have, index, assert_ids,
                                                    fm_ids, tc_ids);
        if (candidates.empty()) {
          // Nothing left to teach; more iterations cannot change the inputs.
          outcome.verdict = Verdict::failed;
          return outcome;
        }
        json symbols = json::array();
        for (std::size_t i = 0; i < candidates.size() && i < kEnforceBatch; ++i) {
          absorb(index::to_knowledge(*candidates[i],
                                     model::Provenance::stage1_exam));
          symbols.push_back(candidates[i]->qualified);
        }
        outcome.trace.push_back(
            {iter, "enforced_retrieval", json{{"symbols", symbols}}});
      }
      continue;
    }

    json requested = json::array();
    json resolved = json::array();
    for (const json& q : turn.at("queries")) {
      const std::string name = q.at("name").get<std::string>();
      const index::QueryKind kind =
          index::query_kind_from_string(q.at("kind").get<std::string>());
      requested.push_back(q);
      const auto items = index.query(name, kind, &nb.allowed,
                                     /*required=*/false,
                                     model::Provenance::stage1_exam);
      for (const model::KnowledgeItem& item : items) {
        absorb(item);
        resolved.push_back(item.symbol);
      }
    }
    outcome.trace.push_back(
        {iter, "queries",
         json{{"requested", requested}, {"resolved", resolved}}});
  }

  outcome.verdict = Verdict::exhausted;
  outcome.iterations_used = max_iter;
  return outcome;
}

}  // namespace tgen::exam
