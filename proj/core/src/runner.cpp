#include "tgen/runner.hpp"

#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <set>

#include "tgen/error.hpp"
#include "tgen/subprocess.hpp"

namespace tgen::runner {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return lines;
}

void replace_all(std::string& text, const std::string& from, const std::string& to) {
  if (from.empty()) return;
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
}

const char* const kAssertionMarkers[] = {"AssertionFailedError", "AssertionError",
                                         "ComparisonFailure", "expected:"};

bool has_assertion_marker(const std::string& text) {
  for (const char* marker : kAssertionMarkers) {
    if (text.find(marker) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::pass:
      return "pass";
    case RunStatus::compile_error:
      return "compile_error";
    case RunStatus::execution_error:
      return "execution_error";
    case RunStatus::assertion_failure:
      return "assertion_failure";
  }
  return "?";
}

RunStatus run_status_from_string(const std::string& s) {
  if (s == "pass") return RunStatus::pass;
  if (s == "compile_error") return RunStatus::compile_error;
  if (s == "execution_error") return RunStatus::execution_error;
  if (s == "assertion_failure") return RunStatus::assertion_failure;
  throw Error(ErrorKind::schema_error, "unknown run status: " + s);
}

ProjectConfig project_config_from_json(const json& doc,
                                       const std::filesystem::path& base_dir) {
  if (!doc.is_object()) {
    throw Error(ErrorKind::config_error, "project config must be an object");
  }
  ProjectConfig config;
  if (!doc.contains("root") || !doc["root"].is_string()) {
    throw Error(ErrorKind::config_error, "project config needs a root path");
  }
  std::filesystem::path root = doc["root"].get<std::string>();
  config.root = root.is_absolute() ? root : base_dir / root;
  config.root = config.root.lexically_normal();
  auto strings = [&doc](const char* key) {
    std::vector<std::string> out;
    if (doc.contains(key)) {
      for (const json& s : doc.at(key)) out.push_back(s.get<std::string>());
    }
    return out;
  };
  config.source_dirs = strings("source_dirs");
  config.test_dirs = strings("test_dirs");
  config.compile_command = doc.value("compile_command", "");
  config.run_command = doc.value("run_command", "");
  config.verify_command = doc.value("verify_command", "");
  config.mutation_report_glob = doc.value("mutation_report_glob", "");
  config.env_passthrough = strings("env_passthrough");
  config.timeout_seconds = doc.value("timeout_seconds", 120);
  if (config.timeout_seconds <= 0) {
    throw Error(ErrorKind::config_error, "timeout_seconds must be positive");
  }
  return config;
}

ProjectConfig load_project_config(const std::filesystem::path& path) {
  return project_config_from_json(read_json(path), path.parent_path());
}

std::string filter_messages(const std::string& raw_log,
                            const index::SymbolIndex& index) {
  std::set<std::string> basenames;
  for (const auto& [file, names] : index.by_file()) {
    (void)names;
    basenames.insert(std::filesystem::path(file).filename().string());
  }
  const char* const detail_keywords[] = {
      "cannot find symbol", "symbol:",        "location:",
      "expected",           "actual",         "AssertionFailedError",
      "AssertionError",     "ComparisonFailure"};

  std::vector<std::string> kept;
  bool headline_taken = false;
  std::string previous;
  for (const std::string& line : split_lines(raw_log)) {
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    bool keep = false;
    if (!headline_taken) {
      keep = true;
      headline_taken = true;
    }
    const bool is_frame = stripped.rfind("at ", 0) == 0;
    if (!keep && is_frame) {
      // "at pkg.Cls.method(File.java:12)" — keep in-project frames only
      const std::size_t paren = stripped.find('(');
      if (paren != std::string::npos) {
        std::string qualified = trim(stripped.substr(3, paren - 3));
        const std::size_t last_dot = qualified.rfind('.');
        if (last_dot != std::string::npos) {
          std::string type = qualified.substr(0, last_dot);
          replace_all(type, "$", ".");
          if (index.find(type)) keep = true;
        }
      }
    }
    if (!keep && !is_frame) {
      for (const std::string& base : basenames) {
        if (stripped.find(base) != std::string::npos) {
          keep = true;
          break;
        }
      }
      if (!keep) {
        for (const char* keyword : detail_keywords) {
          if (stripped.find(keyword) != std::string::npos) {
            keep = true;
            break;
          }
        }
      }
    } else if (!keep && is_frame) {
      // frames naming an indexed file still count as project frames
      for (const std::string& base : basenames) {
        if (stripped.find("(" + base + ":") != std::string::npos) {
          keep = true;
          break;
        }
      }
    }
    if (keep && line != previous) {
      kept.push_back(line);
      previous = line;
    }
  }
  std::string out;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    if (i) out += "\n";
    out += kept[i];
  }
  return out;
}

Runner::Runner(ProjectConfig config, const index::SymbolIndex* index,
               std::size_t slots, std::filesystem::path work_base)
    : config_(std::move(config)),
      index_(index),
      work_base_(std::move(work_base)),
      slots_free_(slots == 0 ? 1 : slots) {
  if (work_base_.empty()) {
    work_base_ = std::filesystem::temp_directory_path() /
                 ("tgen-work-" + std::to_string(getpid()));
  }
  std::filesystem::create_directories(work_base_ / "logs");
}

void Runner::verify_pristine_once() {
  std::lock_guard<std::mutex> lock(verify_mu_);
  if (verified_) {
    if (!verify_ok_) {
      throw Error(ErrorKind::runner_unavailable, verify_message_);
    }
    return;
  }
  verified_ = true;
  if (config_.verify_command.empty()) {
    verify_ok_ = true;
    return;
  }
  ExecResult result = run_shell(config_.verify_command, config_.root,
                                config_.timeout_seconds);
  verify_ok_ = !result.timed_out && result.exit_code == 0;
  if (!verify_ok_) {
    verify_message_ = "pristine build verification failed (exit " +
                      std::to_string(result.exit_code) + ")";
    throw Error(ErrorKind::runner_unavailable, verify_message_);
  }
}

std::string Runner::substitute(const std::string& command_template,
                               const std::filesystem::path& scratch,
                               const std::filesystem::path& test_file) const {
  std::string out = command_template;
  replace_all(out, "{test_file}", test_file.string());
  replace_all(out, "{root}", config_.root.string());
  replace_all(out, "{scratch}", scratch.string());
  return out;
}

std::string Runner::normalize_paths(std::string text,
                                    const std::filesystem::path& scratch) const {
  replace_all(text, scratch.string(), "{scratch}");
  replace_all(text, config_.root.string(), "{root}");
  return text;
}

RunOutcome Runner::run_candidate(const std::string& test_source,
                                 const std::string& test_file_name) {
  if (config_.compile_command.empty() || config_.run_command.empty()) {
    throw Error(ErrorKind::runner_unavailable,
                "project config lacks compile/run commands");
  }
  verify_pristine_once();

  struct Slot {
    Runner& runner;
    explicit Slot(Runner& r) : runner(r) {
      std::unique_lock<std::mutex> lock(r.slot_mu_);
      r.slot_cv_.wait(lock, [&r] { return r.slots_free_ > 0; });
      --r.slots_free_;
    }
    ~Slot() {
      {
        std::lock_guard<std::mutex> lock(runner.slot_mu_);
        ++runner.slots_free_;
      }
      runner.slot_cv_.notify_one();
    }
  } slot(*this);

  const std::uint64_t run_id = run_counter_.fetch_add(1);
  const std::filesystem::path scratch =
      work_base_ / ("run-" + std::to_string(run_id));
  std::filesystem::create_directories(scratch);

  const auto started = std::chrono::steady_clock::now();
  RunOutcome outcome;
  try {
    // isolated copy of the test tree + the candidate file
    for (const std::string& dir : config_.test_dirs) {
      const std::filesystem::path from = config_.root / dir;
      if (std::filesystem::exists(from)) {
        std::filesystem::copy(from, scratch / dir,
                              std::filesystem::copy_options::recursive);
      }
    }
    const std::filesystem::path test_file = scratch / test_file_name;
    write_file(test_file, test_source);

    std::map<std::string, std::string> env;
    for (const std::string& key : config_.env_passthrough) {
      if (const char* value = std::getenv(key.c_str())) env[key] = value;
    }

    ExecResult compile = run_shell(substitute(config_.compile_command, scratch, test_file),
                                   config_.root, config_.timeout_seconds, env);
    if (compile.timed_out) {
      throw Error(ErrorKind::timeout_exceeded,
                  "compile phase exceeded " +
                      std::to_string(config_.timeout_seconds) + "s");
    }
    std::string log = normalize_paths(compile.output, scratch);
    if (compile.exit_code != 0) {
      outcome.status = RunStatus::compile_error;
    } else {
      ExecResult run = run_shell(substitute(config_.run_command, scratch, test_file),
                                 config_.root, config_.timeout_seconds, env);
      if (run.timed_out) {
        throw Error(ErrorKind::timeout_exceeded,
                    "run phase exceeded " + std::to_string(config_.timeout_seconds) +
                        "s");
      }
      const std::string run_log = normalize_paths(run.output, scratch);
      if (!log.empty() && !run_log.empty()) log += "\n";
      log += run_log;
      if (run.exit_code == 0) {
        outcome.status = RunStatus::pass;
      } else if (has_assertion_marker(run_log)) {
        outcome.status = RunStatus::assertion_failure;
      } else {
        outcome.status = RunStatus::execution_error;
      }
    }

    outcome.raw_log = work_base_ / "logs" / ("run-" + std::to_string(run_id) + ".log");
    write_file(outcome.raw_log, log);
    if (outcome.status != RunStatus::pass) {
      outcome.messages = index_ ? filter_messages(log, *index_) : log;
    }
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove_all(scratch, ec);
    throw;
  }
  std::error_code ec;
  std::filesystem::remove_all(scratch, ec);
  outcome.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return outcome;
}

}  // namespace tgen::runner
