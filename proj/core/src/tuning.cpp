#include "tgen/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "tgen/error.hpp"
#include "tgen/scenario.hpp"
#include "tgen/schemas.hpp"
#include "tgen/serialize.hpp"

namespace tgen::tuning {

void validate(const TuningSample& sample) {
  model::validate(sample.fm);
  model::validate(sample.tc);
  model::validate(sample.truth);
  if (sample.tc.focal_id != sample.fm.id) {
    throw invariant_violation("sample test targets focal method");
  }
}

json to_json(const TuningSample& sample) {
  json knowledge = json::array();
  for (const model::KnowledgeItem& item : sample.knowledge) {
    knowledge.push_back(model::to_json(item));
  }
  return json{{"fm", model::to_json(sample.fm)},
              {"tc", model::to_json(sample.tc)},
              {"knowledge", knowledge},
              {"truth", model::to_json(sample.truth)}};
}

TuningSample sample_from_json(const json& doc) {
  TuningSample sample;
  try {
    sample.fm = model::focal_method_from_json(doc.at("fm"));
    sample.tc = model::test_case_from_json(doc.at("tc"));
    for (const json& item : doc.at("knowledge")) {
      sample.knowledge.push_back(model::knowledge_item_from_json(item));
    }
    sample.truth = model::scenario_template_from_json(doc.at("truth"));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema_error,
                std::string("tuning sample: ") + e.what());
  }
  validate(sample);
  return sample;
}

std::string serialize_sample(const TuningSample& sample) {
  validate(sample);
  return canonical_dump(make_envelope("tuning_sample", to_json(sample)));
}

TuningSample parse_sample(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse_error,
                std::string("tuning sample: ") + e.what());
  }
  return sample_from_json(open_envelope("tuning_sample", doc));
}

std::vector<TuningSample> load_dataset(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > 12 && name.substr(name.size() - 12) == ".sample.json") {
      files.push_back(entry.path());
    }
  }
  if (ec) {
    throw Error(ErrorKind::io_error, "cannot list dataset dir " + dir.string());
  }
  std::sort(files.begin(), files.end());
  std::vector<TuningSample> out;
  for (const auto& file : files) out.push_back(parse_sample(read_file(file)));
  return out;
}

Split split_dataset(const std::vector<TuningSample>& dataset,
                    const TuningConfig& config) {
  Split split;
  if (config.split_mode == SplitMode::leave_one_project_out) {
    for (const TuningSample& s : dataset) {
      if (s.fm.project == config.holdout_project) {
        split.test.push_back(s);
      } else {
        split.train.push_back(s);
      }
    }
  } else {
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(config.seed);
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
    }
    std::size_t test_count = 0;
    if (dataset.size() >= 2) {
      test_count = static_cast<std::size_t>(
          std::llround(config.test_fraction *
                       static_cast<double>(dataset.size())));
      test_count = std::max<std::size_t>(1, test_count);
      test_count = std::min(test_count, dataset.size() - 1);
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i < test_count ? split.test : split.train).push_back(dataset[order[i]]);
    }
  }
  if (split.train.empty()) {
    throw Error(ErrorKind::empty_train_split,
                "dataset split leaves no training samples");
  }
  return split;
}

namespace {

std::set<std::string> vp_names(const model::ScenarioTemplate& tmpl) {
  const auto names = model::declared_vp_names(tmpl);
  return {names.begin(), names.end()};
}

VpScore score_from_counts(std::size_t matched, std::size_t predicted,
                          std::size_t truth) {
  VpScore score;
  score.precision =
      predicted == 0 ? 0.0
                     : static_cast<double>(matched) /
                           static_cast<double>(predicted);
  score.recall = truth == 0 ? 0.0
                            : static_cast<double>(matched) /
                                  static_cast<double>(truth);
  const double sum = score.precision + score.recall;
  score.f1 = sum == 0.0 ? 0.0 : 2.0 * score.precision * score.recall / sum;
  return score;
}

}  // namespace

VpScore evaluate_vp(const model::ScenarioTemplate& predicted,
                    const model::ScenarioTemplate& truth) {
  const std::set<std::string> p = vp_names(predicted);
  const std::set<std::string> t = vp_names(truth);
  std::size_t matched = 0;
  for (const std::string& name : p) {
    if (t.count(name)) ++matched;
  }
  return score_from_counts(matched, p.size(), t.size());
}

VpScore evaluate_vp_judged(const model::ScenarioTemplate& predicted,
                           const model::ScenarioTemplate& truth,
                           llm::Gateway& judge) {
  const std::set<std::string> p = vp_names(predicted);
  const std::set<std::string> t = vp_names(truth);

  std::ostringstream prompt;
  prompt << "Predicted variation points:\n";
  for (const std::string& name : p) prompt << "- " << name << "\n";
  prompt << "\nReference variation points:\n";
  for (const std::string& name : t) prompt << "- " << name << "\n";
  prompt << "\nPair each predicted variation point with the reference "
            "variation point it denotes, if any. Reply with only a JSON "
            "array: [{\"predicted\": \"<name>\", \"truth\": \"<name>\"}]. "
            "Leave out variation points with no counterpart.";

  llm::CompletionRequest request;
  request.temperature = 0.0;
  request.tag = "tuning.vp_judge";
  request.messages.push_back(
      {llm::Role::system,
       "You align variation point names between two test scenario "
       "templates."});
  request.messages.push_back({llm::Role::user, prompt.str()});

  const json pairs = judge.complete_structured(request, llm::vp_match_schema());
  std::set<std::string> used_p, used_t;
  std::size_t matched = 0;
  for (const json& pair : pairs) {
    const std::string pn = pair.at("predicted").get<std::string>();
    const std::string tn = pair.at("truth").get<std::string>();
    if (!p.count(pn) || !t.count(tn)) continue;       // unknown names
    if (used_p.count(pn) || used_t.count(tn)) continue;  // keep injective
    used_p.insert(pn);
    used_t.insert(tn);
    ++matched;
  }
  return score_from_counts(matched, p.size(), t.size());
}

model::RulePrompt apply_directives(const model::RulePrompt& current,
                                   const json& directives,
                                   std::vector<std::string>* log) {
  model::RulePrompt next = current;
  for (const json& d : directives) {
    const std::string op = d.at("op").get<std::string>();
    if (op == "add") {
      next.rules.push_back(d.at("text").get<std::string>());
      continue;
    }
    const std::size_t index = static_cast<std::size_t>(d.at("index").get<int>());
    if (index >= next.rules.size()) {
      if (log) {
        log->push_back("directive " + op + " skipped: index " +
                       std::to_string(index) + " out of range");
      }
      continue;
    }
    if (op == "modify") {
      next.rules[index] = d.at("text").get<std::string>();
    } else {  // delete
      next.rules.erase(next.rules.begin() +
                       static_cast<std::ptrdiff_t>(index));
    }
  }
  next.lineage = current.version;
  next.version = current.version + 1;
  return next;
}

json to_json(const TuningRun& run) {
  json checkpoints = json::array();
  for (const model::RulePrompt& p : run.checkpoints) {
    checkpoints.push_back(model::to_json(p));
  }
  json metrics = json::array();
  for (const CheckpointMetrics& m : run.metrics) {
    metrics.push_back({{"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"failed_samples", m.failed_samples}});
  }
  return json{
      {"config",
       {{"epochs", run.config.epochs},
        {"batch_size", run.config.batch_size},
        {"seed", run.config.seed},
        {"split_mode", run.config.split_mode == SplitMode::random_split
                           ? "random_split"
                           : "leave_one_project_out"},
        {"test_fraction", run.config.test_fraction},
        {"holdout_project", run.config.holdout_project},
        {"use_judge", run.config.use_judge}}},
      {"checkpoints", checkpoints},
      {"metrics", metrics},
      {"selected", run.selected},
      {"update_calls", run.update_calls},
      {"log", run.log}};
}

namespace {

// Single-turn generation; anything but a parseable template is a failure.
std::optional<model::ScenarioTemplate> generate_once(
    const TuningSample& sample, const model::RulePrompt& rules,
    llm::Gateway& gw, const std::string& label,
    std::vector<std::string>* log) {
  try {
    llm::CompletionRequest request = scenario::build_template_prompt(
        sample.fm, sample.tc, sample.knowledge, rules);
    request.tag = "tuning.generate";
    const json turn =
        gw.complete_structured(request, llm::scenario_turn_schema());
    if (!turn.contains("template")) {
      if (log) log->push_back(label + ": queried instead of producing a template");
      return std::nullopt;
    }
    return model::parse_template(turn["template"].get<std::string>(),
                                 sample.fm.id, std::to_string(rules.version));
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::malformed_output:
      case ErrorKind::parse_error:
      case ErrorKind::invariant_violation:
      case ErrorKind::context_overflow:
        if (log) log->push_back(label + ": " + e.message());
        return std::nullopt;
      default:
        throw;  // infrastructure failures are not sample failures
    }
  }
}

std::string feedback_once(const TuningSample& sample,
                          const model::ScenarioTemplate& predicted,
                          llm::Gateway& gw) {
  std::ostringstream prompt;
  prompt << "Predicted test scenario template:\n"
         << model::render_template_text(predicted) << "\n";
  prompt << "Reference test scenario template:\n"
         << model::render_template_text(sample.truth) << "\n";
  prompt << "Compare the predicted template against the reference: identify "
            "missing variation points, redundant variation points, and "
            "phrasing that is too specific or too general. Then suggest how "
            "the variation-point identification rules should change. Keep it "
            "short.";

  llm::CompletionRequest request;
  request.temperature = 0.0;
  request.tag = "tuning.feedback";
  request.messages.push_back(
      {llm::Role::system,
       "You critique generated test scenario templates against references."});
  request.messages.push_back({llm::Role::user, prompt.str()});
  return gw.complete(request);
}

json synthesize_directives(const std::vector<std::string>& feedback,
                           const model::RulePrompt& rules, llm::Gateway& gw) {
  std::ostringstream prompt;
  prompt << "Current variation-point identification rules:\n";
  if (rules.rules.empty()) {
    prompt << "(none yet)\n";
  } else {
    for (std::size_t i = 0; i < rules.rules.size(); ++i) {
      prompt << i << ". " << rules.rules[i] << "\n";
    }
  }
  prompt << "\nPer-sample feedback:\n";
  for (std::size_t i = 0; i < feedback.size(); ++i) {
    prompt << "Feedback " << (i + 1) << ":\n" << feedback[i] << "\n";
  }
  prompt << "\nSynthesize the feedback into rule edits: merge complementary "
            "suggestions; when suggestions conflict, keep the most general "
            "one and mark that directive \"generalized\": true. Reply with "
            "only a JSON array of at most 8 directives: [{\"op\": "
            "\"add\"|\"modify\"|\"delete\", \"index\": <rule number, for "
            "modify/delete>, \"text\": \"<rule text, for add/modify>\", "
            "\"generalized\": <bool>}].";

  llm::CompletionRequest request;
  request.temperature = 0.0;
  request.tag = "tuning.update";
  request.messages.push_back(
      {llm::Role::system,
       "You maintain a rule list for identifying variation points in test "
       "scenario templates."});
  request.messages.push_back({llm::Role::user, prompt.str()});
  return gw.complete_structured(request, llm::directives_schema());
}

}  // namespace

TuningRun tune(const std::vector<TuningSample>& dataset, llm::Gateway& gw,
               const TuningConfig& config) {
  if (config.epochs < 1 || config.batch_size < 1) {
    throw Error(ErrorKind::config_error,
                "epochs and batch size must be positive");
  }
  const Split split = split_dataset(dataset, config);

  TuningRun run;
  run.config = config;
  model::RulePrompt prompt = scenario::default_rule_prompt();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t start = 0; start < split.train.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(split.train.size(),
                   start + static_cast<std::size_t>(config.batch_size));
      std::vector<std::string> feedback;
      for (std::size_t i = start; i < end; ++i) {
        const TuningSample& sample = split.train[i];
        const std::string label = "epoch " + std::to_string(epoch) +
                                  " train sample " + sample.tc.id;
        const auto predicted =
            generate_once(sample, prompt, gw, label, &run.log);
        if (predicted) {
          feedback.push_back(feedback_once(sample, *predicted, gw));
        }
      }
      if (feedback.empty()) {
        // Keep the update cadence even when the whole batch failed.
        feedback.push_back("(no usable feedback this batch)");
      }
      try {
        const json directives = synthesize_directives(feedback, prompt, gw);
        prompt = apply_directives(prompt, directives, &run.log);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::malformed_output) throw;
        run.log.push_back("epoch " + std::to_string(epoch) +
                          ": rule update discarded: " + e.message());
      }
      ++run.update_calls;
    }
    run.checkpoints.push_back(prompt);
  }

  // Evaluate every checkpoint on the held-out split.
  for (const model::RulePrompt& checkpoint : run.checkpoints) {
    CheckpointMetrics metrics;
    for (const TuningSample& sample : split.test) {
      const std::string label =
          "eval v" + std::to_string(checkpoint.version) + " " + sample.tc.id;
      VpScore score;
      const auto predicted =
          generate_once(sample, checkpoint, gw, label, &run.log);
      if (predicted) {
        score = config.use_judge
                    ? evaluate_vp_judged(*predicted, sample.truth, gw)
                    : evaluate_vp(*predicted, sample.truth);
      } else {
        ++metrics.failed_samples;
      }
      metrics.precision += score.precision;
      metrics.recall += score.recall;
      metrics.f1 += score.f1;
    }
    if (!split.test.empty()) {
      const double n = static_cast<double>(split.test.size());
      metrics.precision /= n;
      metrics.recall /= n;
      metrics.f1 /= n;
    }
    run.metrics.push_back(metrics);
  }

  run.selected = 0;
  for (std::size_t i = 1; i < run.metrics.size(); ++i) {
    if (run.metrics[i].f1 > run.metrics[run.selected].f1) run.selected = i;
  }
  return run;
}

}  // namespace tgen::tuning
