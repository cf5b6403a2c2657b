#include "tgen/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>
#include <utility>

#include "CLI11.hpp"

#include "tgen/coverage.hpp"
#include "tgen/error.hpp"
#include "tgen/gateway.hpp"
#include "tgen/index.hpp"
#include "tgen/jsonio.hpp"
#include "tgen/pipeline.hpp"
#include "tgen/providers.hpp"
#include "tgen/runner.hpp"
#include "tgen/serialize.hpp"
#include "tgen/tuning.hpp"
#include "tgen/workspace.hpp"

namespace tgen::cli {
namespace {

namespace fs = std::filesystem;

struct TranscriptSpec {
  std::string mode;  // "record" | "replay" | "" (live, unrecorded)
  std::string path;
};

TranscriptSpec parse_transcript_flag(const std::string& value) {
  if (value.empty()) return {};
  const std::size_t colon = value.find(':');
  const std::string mode = value.substr(0, colon == std::string::npos ? value.size() : colon);
  if (colon == std::string::npos || (mode != "record" && mode != "replay") ||
      colon + 1 >= value.size()) {
    throw Error(ErrorKind::config_error,
                "--transcript must be record:<path> or replay:<path>");
  }
  return {mode, value.substr(colon + 1)};
}

struct GlobalOpts {
  std::string config_path;
  std::string transcript_flag;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int workers = 0;  // 0 = logical cores
  bool interactive = false;
};

// Values resolved from the --config file; flags override the stage options.
struct ToolConfig {
  std::optional<runner::ProjectConfig> project;
  std::optional<llm::LiveConfig> provider;
  pipeline::StageOptions stage_defaults;
  std::size_t runner_slots = 2;
};

ToolConfig load_tool_config(const std::string& path) {
  ToolConfig cfg;
  if (path.empty()) return cfg;
  json doc;
  try {
    doc = read_json(path);
  } catch (const Error& e) {
    throw Error(ErrorKind::config_error, "--config " + path + ": " + e.message());
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::config_error, "--config " + path + ": not a JSON object");
  }
  const fs::path base = fs::path(path).parent_path();
  try {
    if (doc.contains("project_file")) {
      fs::path pf = doc.at("project_file").get<std::string>();
      if (pf.is_relative()) pf = base / pf;
      cfg.project = runner::load_project_config(pf);
    } else if (doc.contains("project")) {
      cfg.project = runner::project_config_from_json(doc.at("project"), base);
    }
    if (doc.contains("provider")) {
      const json& p = doc.at("provider");
      llm::LiveConfig live;
      live.endpoint = p.value("endpoint", "");
      live.model = p.value("model", "");
      live.api_key = p.value("api_key", "");
      live.path = p.value("path", live.path);
      live.timeout_seconds = p.value("timeout_seconds", live.timeout_seconds);
      if (!live.endpoint.empty() && !live.model.empty()) cfg.provider = live;
    }
    pipeline::StageOptions& s = cfg.stage_defaults;
    s.max_exam_iterations = doc.value("max_exam_iterations", s.max_exam_iterations);
    s.max_query_rounds = doc.value("max_query_rounds", s.max_query_rounds);
    s.max_repair_iterations = doc.value("max_repair_iterations", s.max_repair_iterations);
    s.bundle_ceiling = doc.value("bundle_ceiling", s.bundle_ceiling);
    s.wrong_oracle_budget = doc.value("wrong_oracle_budget", s.wrong_oracle_budget);
    s.knowledge_budget = doc.value("knowledge_budget", s.knowledge_budget);
    cfg.runner_slots = doc.value("runner_slots", cfg.runner_slots);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config_error, "--config " + path + ": " + e.what());
  }
  return cfg;
}

json resolved_config_json(const GlobalOpts& g, const ToolConfig& cfg,
                          const pipeline::StageOptions& stages) {
  json provider(nullptr);
  if (cfg.provider.has_value()) {
    // The key never leaves the process; the manifest records routing only.
    provider = json{{"endpoint", cfg.provider->endpoint},
                    {"model", cfg.provider->model},
                    {"path", cfg.provider->path}};
  }
  return json{
      {"config_file", g.config_path},
      {"project_root", cfg.project ? cfg.project->root.string() : ""},
      {"provider", std::move(provider)},
      {"runner_slots", cfg.runner_slots},
      {"stage_options",
       json{{"stage", stages.stage},
            {"max_exam_iterations", stages.max_exam_iterations},
            {"max_query_rounds", stages.max_query_rounds},
            {"max_repair_iterations", stages.max_repair_iterations},
            {"bundle_ceiling", stages.bundle_ceiling},
            {"wrong_oracle_budget", stages.wrong_oracle_budget},
            {"knowledge_budget", stages.knowledge_budget}}}};
}

struct Ctx {
  GlobalOpts g;
  ToolConfig cfg;
  TranscriptSpec transcript;
  json resolved_config;
  std::string manifest_id;
  std::string origin_manifest;
  std::istream* in = nullptr;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  std::shared_ptr<llm::TranscriptRecorder> recorder;
  std::unique_ptr<llm::Gateway> gateway;

  int resolved_workers() const {
    if (g.workers > 0) return g.workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }
};

std::string compute_manifest_id(const Ctx& ctx, const std::string& subcommand) {
  const json basis{{"subcommand", subcommand},
                   {"seed", ctx.g.seed},
                   {"tool_version", kToolVersion},
                   {"transcript", json{{"mode", ctx.transcript.mode},
                                       {"path", ctx.transcript.path}}},
                   {"config", ctx.resolved_config}};
  return fnv1a_hex(canonical_dump(basis));
}

// Builds the gateway for commands that talk to the model. Live mode without
// provider configuration is a configuration error (exit 3).
void open_gateway(Ctx& ctx) {
  if (ctx.gateway) return;
  std::shared_ptr<llm::Provider> provider;
  if (ctx.transcript.mode == "replay") {
    auto replay = std::make_shared<llm::ReplayProvider>(fs::path(ctx.transcript.path));
    ctx.origin_manifest = replay->meta().value("manifest_id", "");
    provider = std::move(replay);
  } else {
    std::optional<llm::LiveConfig> live = ctx.cfg.provider;
    if (!live.has_value()) live = llm::live_config_from_env();
    if (!live.has_value()) {
      throw Error(ErrorKind::config_error,
                  "live mode needs provider configuration: set \"provider\" in "
                  "--config or TGEN_LLM_ENDPOINT / TGEN_LLM_MODEL");
    }
    provider = std::make_shared<llm::LiveProvider>(*live);
    if (ctx.transcript.mode == "record") {
      ctx.recorder = std::make_shared<llm::TranscriptRecorder>(ctx.transcript.path);
      ctx.recorder->append_meta(json{{"manifest_id", ctx.manifest_id}});
    }
  }
  ctx.gateway = std::make_unique<llm::Gateway>(std::move(provider), ctx.recorder);
}

void write_manifest(const Ctx& ctx, const std::string& subcommand,
                    std::vector<std::string> artifacts,
                    const std::vector<std::string>& notes) {
  std::sort(artifacts.begin(), artifacts.end());
  json body{{"subcommand", subcommand},
            {"config", ctx.resolved_config},
            {"seed", ctx.g.seed},
            {"transcript", json{{"mode", ctx.transcript.mode},
                                {"path", ctx.transcript.path}}},
            {"out_dir", "."},
            {"tool_version", kToolVersion},
            {"workers", ctx.resolved_workers()},
            {"artifacts", artifacts},
            {"notes", notes},
            {"manifest_id", ctx.manifest_id},
            {"origin_manifest", ctx.origin_manifest}};
  fs::create_directories(ctx.g.out_dir);
  write_file(fs::path(ctx.g.out_dir) / "manifest.json",
             canonical_dump(pipeline::make_report("run_manifest", std::move(body))));
}

index::SymbolIndex resolve_index(const std::string& index_file,
                                 const std::string& root) {
  if (!index_file.empty()) return index::SymbolIndex::load(index_file);
  if (!root.empty()) return index::SymbolIndex::build(root);
  throw Error(ErrorKind::config_error, "supply --index <file> or --root <dir>");
}

std::string project_label(const std::string& flag, const std::string& root,
                          const ToolConfig& cfg) {
  if (!flag.empty()) return flag;
  if (!root.empty()) {
    const std::string name = fs::path(root).filename().string();
    if (!name.empty()) return name;
  }
  if (cfg.project.has_value()) {
    const std::string name = cfg.project->root.filename().string();
    if (!name.empty()) return name;
  }
  return "project";
}

std::unique_ptr<runner::Runner> make_runner(const Ctx& ctx,
                                            const index::SymbolIndex& index,
                                            const std::string& need) {
  if (!ctx.cfg.project.has_value()) {
    throw Error(ErrorKind::config_error,
                need + " needs a project runner: set \"project\" in --config");
  }
  const std::size_t slots = std::max<std::size_t>(
      1, std::min<std::size_t>(ctx.cfg.runner_slots,
                               static_cast<std::size_t>(ctx.resolved_workers())));
  return std::make_unique<runner::Runner>(*ctx.cfg.project, &index, slots);
}

pipeline::OracleChooser make_chooser(Ctx& ctx) {
  if (!ctx.g.interactive) return nullptr;
  return [&ctx](const model::ScenarioInstance& instance,
                std::size_t ordinal) -> std::optional<std::size_t> {
    std::ostream& out = *ctx.out;
    out << "instance " << (ordinal + 1) << " oracles:\n";
    for (std::size_t i = 0; i < instance.oracles.size(); ++i) {
      out << "  [" << i << "] " << model::to_string(instance.oracles[i].kind)
          << ": " << instance.oracles[i].statement << "\n";
    }
    out << "choose oracle [enter keeps 0 = primary]: " << std::flush;
    std::string line;
    if (!std::getline(*ctx.in, line)) return std::nullopt;
    const auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return std::nullopt;
    const auto end = line.find_last_not_of(" \t\r");
    line = line.substr(begin, end - begin + 1);
    try {
      return static_cast<std::size_t>(std::stoul(line));
    } catch (const std::exception&) {
      out << "unrecognized choice; keeping the primary oracle\n";
      return std::nullopt;
    }
  };
}

std::string sanitize_label(const std::string& raw) {
  std::string out;
  for (char c : raw) {
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')
               ? c
               : '_';
  }
  return out.empty() ? std::string("report") : out;
}

// ---- error -> exit code mapping -------------------------------------------
// Setup failures (loading inputs, resolving selectors, wiring providers) are
// input (2) or configuration (3) errors; anything thrown while the pipeline
// itself runs is a pipeline failure (1).

int setup_exit_code(const Error& e) {
  return e.kind() == ErrorKind::config_error ? kExitConfig : kExitInput;
}

int run_exit_code(const Error& e) {
  return e.kind() == ErrorKind::config_error ? kExitConfig : kExitPipeline;
}

// ---- subcommand argument bags ----------------------------------------------

struct IndexArgs {
  std::string root;
  std::string index_out;
  bool rebuild = false;
};

struct GeneralizeArgs {
  std::string root;
  std::string index_file;
  std::string project;
  std::string focal;
  std::string test;
  std::string rules_file;
  int stage = 3;
  std::optional<int> max_queries;
  std::optional<int> max_exam_iter;
  std::optional<int> max_repair_iter;
  std::optional<std::size_t> ceiling;
  std::optional<std::size_t> wrong_budget;
  std::optional<std::size_t> knowledge_budget;
};

struct TuneArgs {
  std::string dataset;
  int epochs = 3;
  int batch = 5;
  std::string split = "random";
  double test_fraction = 0.2;
  std::string holdout;
  bool judge = false;
};

struct EvalArgs {
  std::string metric = "mutation";
  std::string reports;
  std::string gt;
  std::string gen;
  std::string focal;
};

// ---- subcommands -----------------------------------------------------------

int cmd_index(Ctx& ctx, const IndexArgs& args) {
  index::SymbolIndex idx;
  try {
    idx = index::SymbolIndex::build(args.root);
  } catch (const Error& e) {
    *ctx.err << "error: " << e.what() << "\n";
    return setup_exit_code(e);
  }
  const fs::path out_path = args.index_out.empty()
                                ? fs::path(ctx.g.out_dir) / "index.json"
                                : fs::path(args.index_out);
  try {
    fs::create_directories(out_path.parent_path().empty() ? "." : out_path.parent_path());
    idx.save(out_path);
    std::vector<std::string> notes;
    for (const std::string& w : idx.warnings()) notes.push_back("warning: " + w);
    if (args.rebuild) notes.push_back("rebuild requested; content is build-deterministic");
    write_manifest(ctx, "index",
                   {args.index_out.empty() ? "index.json" : args.index_out}, notes);
  } catch (const Error& e) {
    *ctx.err << "error: " << e.what() << "\n";
    return run_exit_code(e);
  }
  *ctx.out << "indexed " << idx.symbols().size() << " symbols across "
           << idx.by_file().size() << " files -> " << out_path.string() << "\n";
  for (const std::string& w : idx.warnings()) *ctx.out << "warning: " << w << "\n";
  return kExitSuccess;
}

struct GeneralizeSetup {
  index::SymbolIndex index;
  model::FocalMethod fm;
  model::TestCase tc;
  model::RulePrompt rules;
  pipeline::StageOptions options;
  std::unique_ptr<runner::Runner> runner;
};

// Shared by cmd_exam (stage pinned to 1) and cmd_generalize.
int run_generalize(Ctx& ctx, const GeneralizeArgs& args,
                   const std::string& subcommand) {
  GeneralizeSetup s;
  try {
    s.index = resolve_index(args.index_file, args.root);
    const std::string project = project_label(args.project, args.root, ctx.cfg);
    s.fm = workspace::select_focal(s.index, args.focal, project);
    s.tc = workspace::select_test(s.index, args.test, project, s.fm.id);
    s.rules = args.rules_file.empty()
                  ? scenario::default_rule_prompt()
                  : model::parse_rule_prompt(read_file(args.rules_file));

    s.options = ctx.cfg.stage_defaults;
    s.options.stage = args.stage;
    s.options.seed = ctx.g.seed;
    if (args.max_queries) s.options.max_query_rounds = *args.max_queries;
    if (args.max_exam_iter) s.options.max_exam_iterations = *args.max_exam_iter;
    if (args.max_repair_iter) s.options.max_repair_iterations = *args.max_repair_iter;
    if (args.ceiling) s.options.bundle_ceiling = *args.ceiling;
    if (args.wrong_budget) s.options.wrong_oracle_budget = *args.wrong_budget;
    if (args.knowledge_budget) s.options.knowledge_budget = *args.knowledge_budget;

    ctx.resolved_config = resolved_config_json(ctx.g, ctx.cfg, s.options);
    ctx.manifest_id = compute_manifest_id(ctx, subcommand);
    open_gateway(ctx);

    const bool needs_runner =
        s.options.stage >= 3 || !s.tc.assertions.empty();
    if (needs_runner) {
      s.runner = make_runner(ctx, s.index, subcommand);
    }
  } catch (const Error& e) {
    *ctx.err << "error: " << e.what() << "\n";
    return setup_exit_code(e);
  }

  try {
    const pipeline::PipelineResult result = pipeline::run_pipeline(
        s.fm, s.tc, s.index, *ctx.gateway, s.runner.get(), s.rules, s.options,
        make_chooser(ctx));
    const std::vector<std::string> artifacts =
        pipeline::persist(result, s.fm, s.tc, ctx.g.out_dir);
    write_manifest(ctx, subcommand, artifacts, result.notes);
    for (const std::string& note : result.notes) *ctx.out << note << "\n";
    *ctx.out << "stages run: " << result.stages_run << "; exams: "
             << result.exams.size() << "; instances: " << result.instances.size()
             << "; tests: " << result.tests.size() << "\n";
    *ctx.out << "artifacts: " << artifacts.size() << " files -> " << ctx.g.out_dir
             << "\n";
    return kExitSuccess;
  } catch (const Error& e) {
    *ctx.err << "error: " << e.what() << "\n";
    return run_exit_code(e);
  }
}

int cmd_tune(Ctx& ctx, const TuneArgs& args) {
  std::vector<tuning::TuningSample> dataset;
  tuning::TuningConfig config;
  try {
    dataset = tuning::load_dataset(args.dataset);
    if (dataset.empty()) {
      throw Error(ErrorKind::input_error,
                  "dataset directory has no *.sample.json files: " + args.dataset);
    }
    config.epochs = args.epochs;
    config.batch_size = args.batch;
    config.seed = ctx.g.seed;
    config.test_fraction = args.test_fraction;
    config.holdout_project = args.holdout;
    config.use_judge = args.judge;
    if (args.split == "random") {
      config.split_mode = tuning::SplitMode::random_split;
    } else if (args.split == "lopo") {
      config.split_mode = tuning::SplitMode::leave_one_project_out;
    } else {
      throw Error(ErrorKind::config_error, "--split must be random or lopo");
    }
    ctx.resolved_config = resolved_config_json(ctx.g, ctx.cfg, ctx.cfg.stage_defaults);
    ctx.resolved_config["tuning"] =
        json{{"epochs", config.epochs},
             {"batch_size", config.batch_size},
             {"split", args.split},
             {"test_fraction", config.test_fraction},
             {"holdout_project", config.holdout_project},
             {"use_judge", config.use_judge}};
    ctx.manifest_id = compute_manifest_id(ctx, "tune");
    open_gateway(ctx);
  } catch (const Error& e) {
    *ctx.err << "error: " << e.what() << "\n";
    return setup_exit_code(e);
  }

  try {
    const tuning::TuningRun run = tuning::tune(dataset, *ctx.gateway, config);
    fs::create_directories(ctx.g.out_dir);
    write_file(fs::path(ctx.g.out_dir) / "tuning.json",
               canonical_dump(pipeline::make_report("tuning_run", tuning::to_json(run))));
    write_file(fs::path(ctx.g.out_dir) / "selected_prompt.json",
               model::serialize_artifact(run.checkpoints.at(run.selected)));
    write_manifest(ctx, "tune", {"tuning.json", "selected_prompt.json"}, run.log);

    std::ostream& out = *ctx.out;
    out << std::left << std::setw(12) << "checkpoint" << std::right
        << std::setw(10) << "precision" << std::setw(10) << "recall"
        << std::setw(10) << "f1" << std::setw(8) << "failed" << "\n";
    out << std::fixed << std::setprecision(4);
    for (std::size_t i = 0; i < run.checkpoints.size(); ++i) {
      const tuning::CheckpointMetrics& m = run.metrics.at(i);
      out << std::left << std::setw(12)
          << ("v" + std::to_string(run.checkpoints[i].version)) << std::right
          << std::setw(10) << m.precision << std::setw(10) << m.recall
          << std::setw(10) << m.f1 << std::setw(8) << m.failed_samples << "\n";
    }
    out << "rule-update calls: " << run.update_calls << "\n";
    out << "selected: checkpoint " << (run.selected + 1) << " (version "
        << run.checkpoints.at(run.selected).version << ", f1 "
        << run.metrics.at(run.selected).f1 << ")\n";
    out.unsetf(std::ios::floatfield);
    return kExitSuccess;
  } catch (const Error& e) {
    *ctx.err << "error: " << e.what() << "\n";
    return run_exit_code(e);
  }
}

std::vector<coverage::JudgedTest> load_tests(const std::string& dir) {
  std::vector<coverage::JudgedTest> tests;
  if (dir.empty()) return tests;
  if (!fs::is_directory(dir)) {
    throw Error(ErrorKind::input_error, "test directory not found: " + dir);
  }
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      paths.push_back(entry.path());
    }
  }
  std::sort(paths.begin(), paths.end());
  for (const fs::path& p : paths) {
    const model::TestCase tc = model::parse_test_case(read_file(p));
    tests.push_back(coverage::JudgedTest{tc.id, tc.source});
  }
  return tests;
}

std::vector<std::string> ids_of(const std::vector<coverage::JudgedTest>& tests) {
  std::vector<std::string> ids;
  ids.reserve(tests.size());
  for (const auto& t : tests) ids.push_back(t.id);
  return ids;
}

int cmd_eval(Ctx& ctx, const EvalArgs& args) {
  const bool want_mutation = args.metric == "mutation" || args.metric == "both";
  const bool want_llm = args.metric == "llm" || args.metric == "both";

  std::vector<coverage::JudgedTest> gt;
  std::vector<coverage::JudgedTest> gen;
  std::vector<fs::path> report_paths;
  try {
    if (!want_mutation && !want_llm) {
      throw Error(ErrorKind::config_error, "--metric must be mutation, llm, or both");
    }
    gt = load_tests(args.gt);
    gen = load_tests(args.gen);
    if (want_mutation) {
      if (args.reports.empty() || !fs::is_directory(args.reports)) {
        throw Error(ErrorKind::input_error,
                    "--reports must name a directory of mutation reports");
      }
      for (const auto& entry : fs::directory_iterator(args.reports)) {
        if (entry.is_regular_file()) report_paths.push_back(entry.path());
      }
      std::sort(report_paths.begin(), report_paths.end());
      if (report_paths.empty()) {
        throw Error(ErrorKind::input_error,
                    "no mutation reports under " + args.reports);
      }
    }
    ctx.resolved_config = resolved_config_json(ctx.g, ctx.cfg, ctx.cfg.stage_defaults);
    ctx.resolved_config["eval"] = json{{"metric", args.metric},
                                       {"gt_tests", gt.size()},
                                       {"gen_tests", gen.size()}};
    ctx.manifest_id = compute_manifest_id(ctx, "eval");
    if (want_llm) open_gateway(ctx);
  } catch (const Error& e) {
    *ctx.err << "error: " << e.what() << "\n";
    return setup_exit_code(e);
  }

  try {
    std::vector<std::string> artifacts;
    struct Row {
      std::string source;
      std::string metric;
      std::size_t scored = 0;
      std::size_t excluded = 0;
      double aggregate = 0.0;
    };
    std::vector<Row> rows;
    fs::create_directories(ctx.g.out_dir);

    if (want_mutation) {
      const std::vector<std::string> gt_ids = ids_of(gt);
      const std::vector<std::string> gen_ids = ids_of(gen);
      for (const fs::path& path : report_paths) {
        const coverage::ReportProfile profile =
            path.extension() == ".xml" ? coverage::ReportProfile::xml
                                       : coverage::ReportProfile::canonical_json;
        const coverage::MutationReport rep =
            coverage::ingest_mutation_report(path, profile);
        const std::string stem = path.stem().string();
        const std::string focal = args.focal.empty() ? stem : args.focal;
        const coverage::CoverageReport cov = coverage::mutation_report(
            focal, coverage::kill_sets_for(rep, gt_ids),
            coverage::kill_sets_for(rep, gen_ids));
        const std::string name = "coverage-" + sanitize_label(stem) + "-mutation.json";
        write_file(fs::path(ctx.g.out_dir) / name,
                   canonical_dump(pipeline::make_report("coverage",
                                                        coverage::to_json(cov))));
        artifacts.push_back(name);
        rows.push_back(Row{stem, "mutation", cov.per_gt.size(),
                           cov.excluded_gt.size(), cov.aggregate});
      }
    }
    if (want_llm) {
      const std::string focal = args.focal.empty() ? "all" : args.focal;
      const coverage::CoverageReport cov =
          coverage::llm_assessed(focal, gt, gen, *ctx.gateway);
      const std::string name = "coverage-" + sanitize_label(focal) + "-llm.json";
      write_file(fs::path(ctx.g.out_dir) / name,
                 canonical_dump(pipeline::make_report("coverage",
                                                      coverage::to_json(cov))));
      artifacts.push_back(name);
      rows.push_back(Row{focal, "llm", cov.per_gt.size(), cov.excluded_gt.size(),
                         cov.aggregate});
    }

    write_manifest(ctx, "eval", artifacts, {});

    std::ostream& out = *ctx.out;
    out << std::left << std::setw(28) << "source" << std::setw(10) << "metric"
        << std::right << std::setw(8) << "scored" << std::setw(10) << "excluded"
        << std::setw(11) << "aggregate" << "\n";
    out << std::fixed << std::setprecision(4);
    for (const Row& r : rows) {
      out << std::left << std::setw(28) << r.source << std::setw(10) << r.metric
          << std::right << std::setw(8) << r.scored << std::setw(10) << r.excluded
          << std::setw(11) << r.aggregate << "\n";
    }
    out.unsetf(std::ios::floatfield);
    return kExitSuccess;
  } catch (const Error& e) {
    *ctx.err << "error: " << e.what() << "\n";
    return run_exit_code(e);
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in,
        std::ostream& out, std::ostream& err) {
  Ctx ctx;
  ctx.in = &in;
  ctx.out = &out;
  ctx.err = &err;

  CLI::App app{"Scenario-generalizing test toolkit"};
  app.fallthrough();
  app.add_option("--config", ctx.g.config_path, "Tool configuration file (JSON)");
  app.add_option("--transcript", ctx.g.transcript_flag,
                 "record:<path> or replay:<path>");
  app.add_option("--seed", ctx.g.seed, "Deterministic seed");
  app.add_option("--out", ctx.g.out_dir, "Artifact output directory")
      ->default_str("out");
  app.add_option("--workers", ctx.g.workers,
                 "Worker pool size (default: logical cores)");
  app.add_flag("--interactive-oracles", ctx.g.interactive,
               "Prompt for oracle selection per instance");
  app.require_subcommand(1);

  IndexArgs index_args;
  CLI::App* cmd_index_app = app.add_subcommand("index", "Build the symbol index");
  cmd_index_app->add_option("--root", index_args.root, "Project root")->required();
  cmd_index_app->add_option("--index-out", index_args.index_out,
                            "Index file path (default: <out>/index.json)");
  cmd_index_app->add_flag("--rebuild", index_args.rebuild,
                          "Rebuild even if the index exists");

  GeneralizeArgs exam_args;
  CLI::App* cmd_exam_app =
      app.add_subcommand("exam", "Run the masked-oracle exams (stage 1)");
  GeneralizeArgs gen_args;
  CLI::App* cmd_gen_app = app.add_subcommand(
      "generalize", "Generalize the initial test (stages 1-3)");
  for (auto [sub, bag] : {std::pair{cmd_exam_app, &exam_args},
                          std::pair{cmd_gen_app, &gen_args}}) {
    sub->add_option("--root", bag->root, "Project root to index");
    sub->add_option("--index", bag->index_file, "Existing index file");
    sub->add_option("--project", bag->project, "Project label for artifact ids");
    sub->add_option("--focal", bag->focal, "Focal method selector")->required();
    sub->add_option("--test", bag->test, "Initial test selector")->required();
    sub->add_option("--rules", bag->rules_file, "Rule-prompt artifact file");
    sub->add_option("--max-queries", bag->max_queries, "Stage-2 query budget");
    sub->add_option("--max-exam-iter", bag->max_exam_iter, "Stage-1 iteration cap");
    sub->add_option("--max-repair-iter", bag->max_repair_iter,
                    "Stage-3 iteration cap");
    sub->add_option("--ceiling", bag->ceiling, "Settings-bundle ceiling");
    sub->add_option("--wrong-oracles", bag->wrong_budget,
                    "Wrong-oracle candidate budget");
    sub->add_option("--knowledge-budget", bag->knowledge_budget,
                    "Prompt knowledge budget (chars)");
  }
  cmd_gen_app->add_option("--stage", gen_args.stage, "Stop after stage 1, 2, or 3")
      ->check(CLI::Range(1, 3));

  TuneArgs tune_args;
  CLI::App* cmd_tune_app =
      app.add_subcommand("tune", "Auto-tune the rule prompt");
  cmd_tune_app->add_option("--dataset", tune_args.dataset, "Sample directory")
      ->required();
  cmd_tune_app->add_option("--epochs", tune_args.epochs, "Training epochs");
  cmd_tune_app->add_option("--batch", tune_args.batch, "Batch size");
  cmd_tune_app->add_option("--split", tune_args.split, "random | lopo");
  cmd_tune_app->add_option("--test-fraction", tune_args.test_fraction,
                           "Held-out fraction (random split)");
  cmd_tune_app->add_option("--holdout", tune_args.holdout,
                           "Held-out project (lopo split)");
  cmd_tune_app->add_flag("--judge", tune_args.judge,
                         "Judge-based VP matching during evaluation");

  EvalArgs eval_args;
  CLI::App* cmd_eval_app =
      app.add_subcommand("eval", "Score scenario coverage of generated tests");
  cmd_eval_app->add_option("--metric", eval_args.metric, "mutation | llm | both");
  cmd_eval_app->add_option("--reports", eval_args.reports,
                           "Mutation report directory");
  cmd_eval_app->add_option("--gt", eval_args.gt, "Ground-truth test directory");
  cmd_eval_app->add_option("--gen", eval_args.gen, "Generated test directory");
  cmd_eval_app->add_option("--focal", eval_args.focal, "Focal id for the report");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    ctx.cfg = load_tool_config(ctx.g.config_path);
    ctx.transcript = parse_transcript_flag(ctx.g.transcript_flag);
    // Commands refine resolved_config before computing their manifest id.
    ctx.resolved_config =
        resolved_config_json(ctx.g, ctx.cfg, ctx.cfg.stage_defaults);
    ctx.manifest_id = compute_manifest_id(
        ctx, app.get_subcommands().empty()
                 ? ""
                 : app.get_subcommands().front()->get_name());
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return setup_exit_code(e);
  }

  try {
    if (cmd_index_app->parsed()) return cmd_index(ctx, index_args);
    if (cmd_exam_app->parsed()) {
      exam_args.stage = 1;
      return run_generalize(ctx, exam_args, "exam");
    }
    if (cmd_gen_app->parsed()) return run_generalize(ctx, gen_args, "generalize");
    if (cmd_tune_app->parsed()) return cmd_tune(ctx, tune_args);
    if (cmd_eval_app->parsed()) return cmd_eval(ctx, eval_args);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return run_exit_code(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  err << "error: no subcommand selected\n";
  return kExitConfig;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace tgen::cli
