#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tgen/exam.hpp"
#include "tgen/forge.hpp"
#include "tgen/gateway.hpp"
#include "tgen/index.hpp"
#include "tgen/jsonio.hpp"
#include "tgen/model.hpp"
#include "tgen/runner.hpp"
#include "tgen/scenario.hpp"

namespace tgen::pipeline {

struct StageOptions {
  int stage = 3;  // run stages 1..stage
  std::uint64_t seed = 0;
  int max_exam_iterations = 3;
  int max_query_rounds = 3;
  int max_repair_iterations = 3;
  std::size_t bundle_ceiling = 8;
  std::size_t wrong_oracle_budget = 10;
  std::size_t knowledge_budget = 6000;
};

// Developer decision hook for oracle selection; called once per instance with
// its ordinal. Returning nullopt keeps the primary oracle active.
using OracleChooser = std::function<std::optional<std::size_t>(
    const model::ScenarioInstance&, std::size_t ordinal)>;

struct PipelineResult {
  int stages_run = 0;
  bool stage1_skipped = false;  // initial test has no assertions

  // Stage 1
  std::vector<exam::OracleExam> exams;
  std::vector<exam::ExamOutcome> outcomes;

  // Stage 2
  std::optional<model::ScenarioTemplate> tmpl;
  std::vector<scenario::SettingsBundle> bundles;
  std::vector<std::string> rejected_bundles;
  std::vector<model::ScenarioInstance> instances;

  // Stage 3 (parallel to instances)
  std::vector<model::TestCase> tests;
  std::vector<forge::RepairRecord> repairs;

  // Accumulated project knowledge after the last stage run.
  std::vector<model::KnowledgeItem> knowledge;

  std::vector<std::string> notes;  // stage-attributed progress notes
};

// Generalization pipeline for one focal/test pair. An assertion-free initial
// test skips Stage 1 (no exams, empty Stage-1 knowledge) and continues.
// `run` may be null only when no stage needs the project runner (Stage 1
// skipped and stage < 3); otherwise RunnerUnavailable. Module errors
// propagate with a "stage N:" attribution prefix.
PipelineResult run_pipeline(const model::FocalMethod& fm,
                            const model::TestCase& tc,
                            const index::SymbolIndex& index, llm::Gateway& gw,
                            runner::Runner* run, const model::RulePrompt& rules,
                            const StageOptions& options,
                            const OracleChooser& chooser = nullptr);

// Report documents share the artifact envelope under kind "report".
json make_report(const std::string& report_kind, json body);

// Writes every artifact of a result under out_dir with deterministic names
// and canonical bytes. Returns the sorted relative file names written.
std::vector<std::string> persist(const PipelineResult& result,
                                 const model::FocalMethod& fm,
                                 const model::TestCase& tc,
                                 const std::filesystem::path& out_dir);

}  // namespace tgen::pipeline
