#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace tgen::runner {

struct ExecResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string output;  // stdout followed by stderr
};

// Runs `command` through /bin/sh -c in `workdir`, with `env` exported to the
// child. On timeout the whole process group is killed (SIGKILL) and
// timed_out is set. Output is captured via temp files, so arbitrarily large
// logs cannot deadlock the pipe.
ExecResult run_shell(const std::string& command,
                     const std::filesystem::path& workdir, int timeout_seconds,
                     const std::map<std::string, std::string>& env = {});

}  // namespace tgen::runner
