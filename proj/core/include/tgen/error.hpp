#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tgen {

// One error class for the whole toolchain; `kind` carries the contract-level
// failure category that callers and tests dispatch on.
enum class ErrorKind {
  invariant_violation,
  parse_error,
  schema_error,
  replay_miss,
  malformed_output,
  provider_error,
  not_found,
  empty_project,
  runner_unavailable,
  timeout_exceeded,
  context_overflow,
  query_budget_exceeded,
  no_valid_bundles,
  validation_failure,
  choice_out_of_range,
  zero_candidates,
  empty_train_split,
  empty_ground_truth_kill_set,
  config_error,
  input_error,
  io_error,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        message_(std::move(message)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& message() const noexcept { return message_; }

  // ProviderError carries whether a retry could help.
  Error& set_retryable(bool value) {
    retryable_ = value;
    return *this;
  }
  bool retryable() const noexcept { return retryable_; }

  // ParseError / SchemaError position (1-based line, 0 = unknown).
  Error& set_line(std::size_t line) {
    line_ = line;
    return *this;
  }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorKind kind_;
  std::string message_;
  bool retryable_ = false;
  std::size_t line_ = 0;
};

inline Error invariant_violation(const std::string& which) {
  return Error(ErrorKind::invariant_violation, which);
}

inline Error parse_error(std::size_t line, const std::string& reason) {
  Error e(ErrorKind::parse_error, "line " + std::to_string(line) + ": " + reason);
  e.set_line(line);
  return e;
}

}  // namespace tgen
