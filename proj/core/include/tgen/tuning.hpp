#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tgen/gateway.hpp"
#include "tgen/jsonio.hpp"
#include "tgen/model.hpp"

namespace tgen::tuning {

// One labeled example: the generation inputs and the reference template.
struct TuningSample {
  model::FocalMethod fm;
  model::TestCase tc;
  std::vector<model::KnowledgeItem> knowledge;
  model::ScenarioTemplate truth;
};

void validate(const TuningSample& sample);
json to_json(const TuningSample& sample);
TuningSample sample_from_json(const json& doc);
std::string serialize_sample(const TuningSample& sample);
TuningSample parse_sample(const std::string& text);

// Loads every *.sample.json under dir (sorted paths, so deterministic).
std::vector<TuningSample> load_dataset(const std::filesystem::path& dir);

enum class SplitMode { random_split, leave_one_project_out };

struct TuningConfig {
  int epochs = 3;
  int batch_size = 5;
  std::uint64_t seed = 0;
  SplitMode split_mode = SplitMode::random_split;
  double test_fraction = 0.2;     // random_split
  std::string holdout_project;    // leave_one_project_out
  bool use_judge = false;         // online VP matching via judge calls
};

struct Split {
  std::vector<TuningSample> train;
  std::vector<TuningSample> test;
};

// random_split: seeded shuffle, test_fraction rounded to nearest with at
// least one sample on each side when possible. leave_one_project_out: test =
// samples whose focal method belongs to holdout_project. Throws
// EmptyTrainSplit when no training sample remains.
Split split_dataset(const std::vector<TuningSample>& dataset,
                    const TuningConfig& config);

struct VpScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Offline mode: VPs match on canonical-name equality. precision =
// matched/|predicted|, recall = matched/|truth|, f1 the harmonic mean (0
// when both are 0; empty predicted set scores 0).
VpScore evaluate_vp(const model::ScenarioTemplate& predicted,
                    const model::ScenarioTemplate& truth);

// Online mode: a temperature-0 judge call (tag "tuning.vp_judge") proposes
// (predicted, truth) name pairs; non-injective or unknown pairs are dropped.
VpScore evaluate_vp_judged(const model::ScenarioTemplate& predicted,
                           const model::ScenarioTemplate& truth,
                           llm::Gateway& judge);

// Apply rule-edit directives ([{"op": add|modify|delete, ...}]) in order;
// out-of-range indices are skipped into `log`. Returns the edited prompt
// with version bumped and lineage pointing at the input version.
model::RulePrompt apply_directives(const model::RulePrompt& current,
                                   const json& directives,
                                   std::vector<std::string>* log);

struct CheckpointMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int failed_samples = 0;
};

struct TuningRun {
  TuningConfig config;
  std::vector<model::RulePrompt> checkpoints;  // one per epoch, epoch order
  std::vector<CheckpointMetrics> metrics;      // parallel to checkpoints
  std::size_t selected = 0;                    // argmax f1, ties -> earliest
  int update_calls = 0;                        // rule-update (synthesis) calls
  std::vector<std::string> log;
};

json to_json(const TuningRun& run);

// The tuning loop. Per epoch, per batch: one generation call per sample
// (tag "tuning.generate", single turn — a query block counts as a failed
// sample), one feedback call per surviving sample (tag "tuning.feedback"),
// then exactly one rule-update call (tag "tuning.update") whose directives
// edit the rule set. Checkpoints are value copies taken at epoch ends and
// evaluated on the test split; selection is argmax mean F1, ties to the
// earliest epoch.
TuningRun tune(const std::vector<TuningSample>& dataset, llm::Gateway& gw,
               const TuningConfig& config);

}  // namespace tgen::tuning
