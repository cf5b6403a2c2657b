#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "tgen/index.hpp"
#include "tgen/jsonio.hpp"

namespace tgen::runner {

// Per-project build/run configuration. Commands are shell templates;
// placeholders: {test_file} (absolute path of the candidate test),
// {root} (project root), {scratch} (scratch dir).
struct ProjectConfig {
  std::filesystem::path root;
  std::vector<std::string> source_dirs;
  std::vector<std::string> test_dirs;
  std::string compile_command;
  std::string run_command;
  std::string verify_command;  // pristine-build check; empty = skip
  std::string mutation_report_glob;
  std::vector<std::string> env_passthrough;
  int timeout_seconds = 120;
};

ProjectConfig project_config_from_json(const json& doc,
                                       const std::filesystem::path& base_dir);
ProjectConfig load_project_config(const std::filesystem::path& path);

enum class RunStatus { pass, compile_error, execution_error, assertion_failure };
const char* to_string(RunStatus status);
RunStatus run_status_from_string(const std::string& s);

struct RunOutcome {
  RunStatus status = RunStatus::pass;
  std::string messages;  // filtered, path-normalized; empty on pass
  double duration_seconds = 0;  // informational; never serialized
  std::filesystem::path raw_log;  // normalized full log (session-local)
};

// Keeps project-relevant lines: the headline (first non-empty line),
// diagnostics naming an indexed source file, stack frames whose declaring
// class is indexed, and compiler/assertion detail lines. Ordering preserved.
std::string filter_messages(const std::string& raw_log,
                            const index::SymbolIndex& index);

// Boundary to the project under test. Each run_candidate call gets a fresh
// scratch directory (never shared between concurrent calls); heavy builds
// are serialized through a bounded slot pool.
class Runner {
 public:
  Runner(ProjectConfig config, const index::SymbolIndex* index,
         std::size_t slots = 2, std::filesystem::path work_base = {});

  // Writes test_source as <scratch>/<test_file_name> next to a copy of the
  // project's test tree, runs compile then run commands, classifies.
  RunOutcome run_candidate(const std::string& test_source,
                           const std::string& test_file_name);

  const ProjectConfig& config() const { return config_; }

 private:
  void verify_pristine_once();
  std::string substitute(const std::string& command_template,
                         const std::filesystem::path& scratch,
                         const std::filesystem::path& test_file) const;
  std::string normalize_paths(std::string text,
                              const std::filesystem::path& scratch) const;

  ProjectConfig config_;
  const index::SymbolIndex* index_;
  std::filesystem::path work_base_;
  std::atomic<std::uint64_t> run_counter_{0};

  std::mutex slot_mu_;
  std::condition_variable slot_cv_;
  std::size_t slots_free_;

  std::mutex verify_mu_;
  bool verified_ = false;
  bool verify_ok_ = false;
  std::string verify_message_;
};

}  // namespace tgen::runner
