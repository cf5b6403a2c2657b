#include "tgen/pipeline.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "tgen/error.hpp"
#include "tgen/serialize.hpp"

namespace tgen::pipeline {
namespace {

[[noreturn]] void rethrow_with_stage(const Error& e, int stage) {
  Error out(e.kind(), "stage " + std::to_string(stage) + ": " + e.message());
  out.set_retryable(e.retryable());
  out.set_line(e.line());
  throw out;
}

void absorb(std::vector<model::KnowledgeItem>& knowledge,
            const std::vector<model::KnowledgeItem>& items) {
  std::set<std::string> seen;
  for (const model::KnowledgeItem& k : knowledge) seen.insert(k.symbol);
  for (const model::KnowledgeItem& item : items) {
    if (seen.insert(item.symbol).second) knowledge.push_back(item);
  }
}

void run_stage1(const model::FocalMethod& fm, const model::TestCase& tc,
                const index::SymbolIndex& index, llm::Gateway& gw,
                runner::Runner* run, const StageOptions& options,
                PipelineResult& result) {
  if (tc.assertions.empty()) {
    result.stage1_skipped = true;
    result.notes.push_back("stage 1 skipped: initial test has no assertions");
    return;
  }
  if (run == nullptr) {
    throw Error(ErrorKind::runner_unavailable,
                "stage 1: wrong-oracle filtering requires a project runner");
  }
  for (std::size_t i = 0; i < tc.assertions.size(); ++i) {
    const model::AssertionSite& site = tc.assertions[i];
    const std::string label = "assertion " + std::to_string(i + 1);
    std::vector<std::string> variants;
    try {
      variants = exam::generate_wrong_oracles(fm, tc, site, gw,
                                              options.wrong_oracle_budget);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::zero_candidates) throw;
      result.notes.push_back("stage 1: " + label + " skipped: " + e.message());
      continue;
    }
    const auto filtered = exam::filter_candidates(tc, site, variants, *run);
    exam::OracleExam ex;
    try {
      ex = exam::build_exam(tc, site, filtered, options.seed + i);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::invariant_violation) throw;
      result.notes.push_back("stage 1: " + label +
                             " skipped: no valid wrong option survived filtering");
      continue;
    }
    exam::ExamOutcome outcome =
        exam::run_exam(ex, gw, index, fm, tc, options.max_exam_iterations);
    result.notes.push_back("stage 1: exam " + std::to_string(result.exams.size() + 1) +
                           " (" + label + ") " + exam::to_string(outcome.verdict));
    absorb(result.knowledge, outcome.knowledge);
    result.exams.push_back(std::move(ex));
    result.outcomes.push_back(std::move(outcome));
  }
}

void run_stage2(const model::FocalMethod& fm, const model::TestCase& tc,
                const index::SymbolIndex& index, llm::Gateway& gw,
                const model::RulePrompt& rules, const StageOptions& options,
                const OracleChooser& chooser, PipelineResult& result) {
  scenario::TemplateGeneration gen = scenario::generate_template(
      fm, tc, result.knowledge, rules, gw, index, options.max_query_rounds,
      options.knowledge_budget);
  result.tmpl = gen.tmpl;
  result.knowledge = std::move(gen.knowledge);
  result.notes.push_back(
      "stage 2: template with " + std::to_string(gen.tmpl.steps.size()) +
      " steps (" + std::to_string(gen.query_rounds) + " query rounds)");

  scenario::CrystallizeResult crystal = scenario::crystallize(
      *result.tmpl, fm, tc, result.knowledge, gw, options.bundle_ceiling);
  for (const std::string& reason : crystal.rejected) {
    result.notes.push_back("stage 2: bundle rejected: " + reason);
  }
  result.bundles = std::move(crystal.bundles);
  result.rejected_bundles = std::move(crystal.rejected);
  result.instances.reserve(crystal.instances.size());
  for (std::size_t k = 0; k < crystal.instances.size(); ++k) {
    std::optional<std::size_t> choice;
    if (chooser) choice = chooser(crystal.instances[k], k);
    result.instances.push_back(
        scenario::select_oracle(std::move(crystal.instances[k]), choice));
  }
  result.notes.push_back(
      "stage 2: " + std::to_string(result.instances.size()) +
      " instances accepted (" + std::to_string(result.rejected_bundles.size()) +
      " rejected)");
}

void run_stage3(const model::FocalMethod& fm, const model::TestCase& tc,
                const index::SymbolIndex& index, llm::Gateway& gw,
                runner::Runner* run, const StageOptions& options,
                PipelineResult& result) {
  if (run == nullptr) {
    throw Error(ErrorKind::runner_unavailable,
                "stage 3: test execution requires a project runner");
  }
  for (std::size_t k = 0; k < result.instances.size(); ++k) {
    const model::ScenarioInstance& instance = result.instances[k];
    model::TestCase test =
        forge::generate_test(instance, fm, tc, result.knowledge, gw);
    forge::RepairRecord record = forge::repair(
        test, instance, fm, *run, index, gw, options.max_repair_iterations);
    if (!record.attempts.empty()) {
      if (record.attempts.back().test_source != test.source) {
        test.source = record.attempts.back().test_source;
        test.origin = model::TestOrigin::repaired;
      }
      for (const forge::RepairAttempt& attempt : record.attempts) {
        absorb(result.knowledge, attempt.knowledge);
      }
    }
    std::string note = "stage 3: test " + std::to_string(k + 1) + " " +
                       std::string(forge::to_string(record.final_status)) +
                       " after " + std::to_string(record.iterations) +
                       " iteration(s)";
    result.notes.push_back(std::move(note));
    result.tests.push_back(std::move(test));
    result.repairs.push_back(std::move(record));
  }
}

}  // namespace

PipelineResult run_pipeline(const model::FocalMethod& fm,
                            const model::TestCase& tc,
                            const index::SymbolIndex& index, llm::Gateway& gw,
                            runner::Runner* run, const model::RulePrompt& rules,
                            const StageOptions& options,
                            const OracleChooser& chooser) {
  if (options.stage < 1 || options.stage > 3) {
    throw Error(ErrorKind::config_error,
                "stage must be 1, 2, or 3 (got " + std::to_string(options.stage) + ")");
  }
  model::validate(fm);
  model::validate(tc);

  PipelineResult result;
  try {
    run_stage1(fm, tc, index, gw, run, options, result);
  } catch (const Error& e) {
    rethrow_with_stage(e, 1);
  }
  result.stages_run = 1;
  if (options.stage <= 1) return result;

  try {
    run_stage2(fm, tc, index, gw, rules, options, chooser, result);
  } catch (const Error& e) {
    rethrow_with_stage(e, 2);
  }
  result.stages_run = 2;
  if (options.stage <= 2) return result;

  try {
    run_stage3(fm, tc, index, gw, run, options, result);
  } catch (const Error& e) {
    rethrow_with_stage(e, 3);
  }
  result.stages_run = 3;
  return result;
}

json make_report(const std::string& report_kind, json body) {
  json doc = std::move(body);
  doc["artifact"] = "report";
  doc["report_kind"] = report_kind;
  return doc;
}

std::vector<std::string> persist(const PipelineResult& result,
                                 const model::FocalMethod& fm,
                                 const model::TestCase& tc,
                                 const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::pair<std::string, std::string>> files;

  files.emplace_back("focal_method.json", model::serialize_artifact(fm));
  files.emplace_back("initial_test.json", model::serialize_artifact(tc));

  for (std::size_t i = 0; i < result.exams.size(); ++i) {
    const std::string n = std::to_string(i + 1);
    files.emplace_back("exam-" + n + ".json",
                       exam::serialize_exam(result.exams[i]));
    json body = exam::to_json(result.outcomes[i]);
    body["exam_ordinal"] = i + 1;
    files.emplace_back("exam-" + n + "-outcome.json",
                       canonical_dump(make_report("exam_outcome", std::move(body))));
  }

  json items = json::array();
  for (const model::KnowledgeItem& item : result.knowledge) {
    items.push_back(model::to_json(item));
  }
  files.emplace_back("knowledge.json",
                     canonical_dump(json{{"artifact", "knowledge_set"},
                                         {"items", std::move(items)}}));

  if (result.tmpl.has_value()) {
    files.emplace_back("template.json", model::serialize_artifact(*result.tmpl));
    json accepted = json::array();
    for (const scenario::SettingsBundle& b : result.bundles) {
      accepted.push_back(scenario::to_json(b));
    }
    files.emplace_back(
        "bundles.json",
        canonical_dump(json{{"artifact", "bundle_set"},
                            {"accepted", std::move(accepted)},
                            {"rejected", result.rejected_bundles}}));
  }
  for (std::size_t k = 0; k < result.instances.size(); ++k) {
    files.emplace_back("instance-" + std::to_string(k + 1) + ".json",
                       model::serialize_artifact(result.instances[k]));
  }
  for (std::size_t k = 0; k < result.tests.size(); ++k) {
    files.emplace_back("test-" + std::to_string(k + 1) + ".json",
                       model::serialize_artifact(result.tests[k]));
  }
  for (std::size_t k = 0; k < result.repairs.size(); ++k) {
    json body = forge::to_json(result.repairs[k]);
    body["instance_ordinal"] = k + 1;
    files.emplace_back("repair-" + std::to_string(k + 1) + ".json",
                       canonical_dump(make_report("repair_record", std::move(body))));
  }

  files.emplace_back(
      "pipeline.json",
      canonical_dump(make_report(
          "pipeline", json{{"stages_run", result.stages_run},
                           {"stage1_skipped", result.stage1_skipped},
                           {"exams", result.exams.size()},
                           {"instances", result.instances.size()},
                           {"tests", result.tests.size()},
                           {"notes", result.notes}})));

  std::vector<std::string> names;
  names.reserve(files.size());
  for (const auto& [name, content] : files) {
    write_file(out_dir / name, content);
    names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace tgen::pipeline
