#include "tgen/subprocess.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include "tgen/error.hpp"
#include "tgen/jsonio.hpp"

namespace tgen::runner {

namespace {

struct TempFile {
  std::string path;
  int fd = -1;

  explicit TempFile(const char* stem) {
    const std::filesystem::path dir = std::filesystem::temp_directory_path();
    path = (dir / (std::string(stem) + "-XXXXXX")).string();
    fd = mkstemp(path.data());
    if (fd < 0) {
      throw Error(ErrorKind::io_error, "mkstemp failed for " + path);
    }
  }
  ~TempFile() {
    if (fd >= 0) close(fd);
    unlink(path.c_str());
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  std::string contents() const {
    std::string text;
    try {
      text = read_file(path);
    } catch (const Error&) {
      // racing unlink or empty file: treat as no output
    }
    return text;
  }
};

}  // namespace

ExecResult run_shell(const std::string& command,
                     const std::filesystem::path& workdir, int timeout_seconds,
                     const std::map<std::string, std::string>& env) {
  TempFile out("tgen-out");
  TempFile err("tgen-err");

  const pid_t pid = fork();
  if (pid < 0) {
    throw Error(ErrorKind::io_error, "fork failed");
  }
  if (pid == 0) {
    setpgid(0, 0);
    if (!workdir.empty()) {
      if (chdir(workdir.c_str()) != 0) _exit(126);
    }
    for (const auto& [key, value] : env) {
      setenv(key.c_str(), value.c_str(), 1);
    }
    dup2(out.fd, STDOUT_FILENO);
    dup2(err.fd, STDERR_FILENO);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);  // both sides set it to close the race before kill

  ExecResult result;
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::seconds(timeout_seconds);
  int status = 0;
  for (;;) {
    const pid_t done = waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0) {
      throw Error(ErrorKind::io_error, "waitpid failed");
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
      result.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }

  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  result.output = out.contents() + err.contents();
  return result;
}

}  // namespace tgen::runner
