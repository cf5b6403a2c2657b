#include "tgen/error.hpp"

namespace tgen {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invariant_violation:
      return "InvariantViolation";
    case ErrorKind::parse_error:
      return "ParseError";
    case ErrorKind::schema_error:
      return "SchemaError";
    case ErrorKind::replay_miss:
      return "ReplayMiss";
    case ErrorKind::malformed_output:
      return "MalformedOutput";
    case ErrorKind::provider_error:
      return "ProviderError";
    case ErrorKind::not_found:
      return "NotFound";
    case ErrorKind::empty_project:
      return "EmptyProject";
    case ErrorKind::runner_unavailable:
      return "RunnerUnavailable";
    case ErrorKind::timeout_exceeded:
      return "TimeoutExceeded";
    case ErrorKind::context_overflow:
      return "ContextOverflow";
    case ErrorKind::query_budget_exceeded:
      return "QueryBudgetExceeded";
    case ErrorKind::no_valid_bundles:
      return "NoValidBundles";
    case ErrorKind::validation_failure:
      return "ValidationFailure";
    case ErrorKind::choice_out_of_range:
      return "ChoiceOutOfRange";
    case ErrorKind::zero_candidates:
      return "ZeroCandidates";
    case ErrorKind::empty_train_split:
      return "EmptyTrainSplit";
    case ErrorKind::empty_ground_truth_kill_set:
      return "EmptyGroundTruthKillSet";
    case ErrorKind::config_error:
      return "ConfigError";
    case ErrorKind::input_error:
      return "InputError";
    case ErrorKind::io_error:
      return "IoError";
  }
  return "UnknownError";
}

}  // namespace tgen
