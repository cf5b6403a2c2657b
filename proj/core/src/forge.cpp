#include "tgen/forge.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>

#include "tgen/error.hpp"
#include "tgen/exam.hpp"
#include "tgen/java_scan.hpp"
#include "tgen/schemas.hpp"
#include "tgen/serialize.hpp"

namespace tgen::forge {

namespace {

std::string camelize(const std::string& value) {
  std::string out;
  bool new_word = true;
  for (unsigned char c : value) {
    if (std::isalnum(c)) {
      out += new_word ? static_cast<char>(std::toupper(c))
                      : static_cast<char>(c);
      new_word = false;
    } else {
      new_word = true;
    }
  }
  return out;
}

constexpr std::size_t kNameCap = 64;

// Code region of a response: first fenced block if present, else the whole
// text trimmed.
std::string extract_code(const std::string& text) {
  const std::size_t open = text.find("```");
  if (open == std::string::npos) {
    const auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = text.find_last_not_of(" \t\r\n");
    return text.substr(begin, end - begin + 1);
  }
  std::size_t body = text.find('\n', open);
  if (body == std::string::npos) return "";
  ++body;
  const std::size_t close = text.find("```", body);
  if (close == std::string::npos) return text.substr(body);
  std::string code = text.substr(body, close - body);
  while (!code.empty() && (code.back() == '\n' || code.back() == '\r')) {
    code.pop_back();
  }
  return code;
}

bool is_ident(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

// Positions of method-header names: identifiers that follow a `void` token
// and precede a '('. Works on comment/string-masked source.
std::vector<std::pair<std::size_t, std::size_t>> method_names(
    const std::string& masked) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t pos = 0;
  while ((pos = masked.find("void", pos)) != std::string::npos) {
    const bool lead_ok = pos == 0 || !is_ident(masked[pos - 1]);
    std::size_t after = pos + 4;
    if (!lead_ok || (after < masked.size() && is_ident(masked[after]))) {
      pos = after;
      continue;
    }
    while (after < masked.size() &&
           std::isspace(static_cast<unsigned char>(masked[after]))) {
      ++after;
    }
    const std::size_t name_begin = after;
    while (after < masked.size() && is_ident(masked[after])) ++after;
    std::size_t probe = after;
    while (probe < masked.size() &&
           std::isspace(static_cast<unsigned char>(masked[probe]))) {
      ++probe;
    }
    if (after > name_begin && probe < masked.size() && masked[probe] == '(') {
      out.emplace_back(name_begin, after - name_begin);
    }
    pos = after;
  }
  return out;
}

llm::Schema single_test_schema() {
  llm::Schema schema;
  schema.id = "forge.test_method";
  schema.corrective_hint =
      "Your previous output did not conform. Reply with exactly one Java "
      "test method (plus any needed import lines), as a single code block "
      "and nothing else.";
  schema.parse = [](const std::string& text) {
    const std::string code = extract_code(text);
    if (code.empty()) {
      throw Error(ErrorKind::malformed_output, "response contains no code");
    }
    const auto names = method_names(index::mask_java(code));
    if (names.size() != 1) {
      throw Error(ErrorKind::malformed_output,
                  "exactly one test method expected, found " +
                      std::to_string(names.size()));
    }
    return json{{"source", code},
                {"method", code.substr(names[0].first, names[0].second)}};
  };
  return schema;
}

std::string rename_method(const std::string& source,
                          const std::string& new_name) {
  const auto names = method_names(index::mask_java(source));
  if (names.size() != 1) {
    throw Error(ErrorKind::malformed_output,
                "exactly one test method expected, found " +
                    std::to_string(names.size()));
  }
  std::string out = source;
  out.replace(names[0].first, names[0].second, new_name);
  return out;
}

std::string render_knowledge(const std::vector<model::KnowledgeItem>& items) {
  if (items.empty()) return "none provided\n";
  std::ostringstream out;
  for (const model::KnowledgeItem& item : items) {
    out << "SYMBOL " << item.symbol << " (" << model::to_string(item.kind)
        << ")\n" << item.definition << "\n";
  }
  return out.str();
}

const model::Oracle& active_oracle(const model::ScenarioInstance& instance) {
  return instance.oracles.at(instance.active_oracle);
}

}  // namespace

std::string derive_test_name(const model::FocalMethod& fm,
                             const model::ScenarioInstance& instance) {
  std::string focal = "test";
  if (auto parts = model::parse_symbol_id(fm.id)) {
    std::string member = parts->member;
    const std::size_t paren = member.find('(');
    if (paren != std::string::npos) member.resize(paren);
    if (!member.empty()) focal = member;
  }
  std::string name = focal;
  for (const auto& [vp, setting] : instance.settings) {
    const std::string slug = camelize(setting);
    if (slug.empty()) continue;
    if (name.size() + slug.size() > kNameCap) break;
    name += slug;
  }
  if (name == focal) name += "Scenario";
  return name;
}

model::TestCase generate_test(const model::ScenarioInstance& instance,
                              const model::FocalMethod& fm,
                              const model::TestCase& tc,
                              const std::vector<model::KnowledgeItem>& knowledge,
                              llm::Gateway& gw) {
  model::validate(instance);

  std::ostringstream prompt;
  prompt << "Focal method:\n```java\n" << fm.source << "\n```\n\n";
  prompt << "Focal file skeleton:\n```java\n" << fm.file_skeleton
         << "\n```\n\n";
  prompt << "Reference test:\n```java\n" << tc.source << "\n```\n\n";
  prompt << "Project knowledge:\n" << render_knowledge(knowledge) << "\n";
  prompt << "Scenario plan:\n" << instance.narrative << "\n\n";
  prompt << "Oracle to assert:\n" << active_oracle(instance).statement
         << "\n\n";
  prompt << "Write one Java test method that follows the scenario plan and "
            "asserts the oracle. Include any needed import lines above the "
            "method. Reply with only the code.";

  llm::CompletionRequest request;
  request.temperature = 0.0;
  request.tag = "forge.generate";
  request.messages.push_back(
      {llm::Role::system,
       "You write Java unit tests from test scenario plans."});
  request.messages.push_back({llm::Role::user, prompt.str()});

  const json parsed = gw.complete_structured(request, single_test_schema());

  model::TestCase out;
  out.name = derive_test_name(fm, instance);
  out.source = rename_method(parsed["source"].get<std::string>(), out.name);
  out.focal_id = fm.id;
  out.origin = model::TestOrigin::generated;
  if (auto parts = model::parse_symbol_id(tc.id)) {
    out.id = model::make_symbol_id(parts->project, parts->type, out.name + "()");
  } else {
    out.id = "generated/" + out.name;
  }
  return out;
}

const char* to_string(FinalStatus status) {
  return status == FinalStatus::passing ? "passing" : "failing_after_max";
}

std::vector<ErrorElement> extract_error_elements(const std::string& messages) {
  static const std::regex diag_line(
      R"(([A-Za-z0-9_$./\{\}-]+\.java):(\d+):.*cannot find symbol)");
  static const std::regex symbol_line(
      R"(symbol:\s*(?:method|variable|class|constructor)?\s*([A-Za-z_$][A-Za-z0-9_$]*))");
  static const std::regex inline_diag(
      R"(cannot find symbol:?\s*(?:method|variable|class|constructor)?\s*([A-Za-z_$][A-Za-z0-9_$]*).*\bat\s+([A-Za-z0-9_$./\{\}-]+\.java):(\d+))");
  static const std::regex frame(
      R"(at\s+([A-Za-z0-9_$.]+)\.([A-Za-z0-9_$<>]+)\(([A-Za-z0-9_$.-]+\.java):(\d+)\))");

  std::vector<ErrorElement> out;
  std::set<std::string> seen;
  auto push = [&](ErrorElement e) {
    const std::string key = e.name + "|" + e.file + "|" + std::to_string(e.line);
    if (seen.insert(key).second) out.push_back(std::move(e));
  };

  std::istringstream in(messages);
  std::string line;
  bool pending_diag = false;
  std::string diag_file;
  std::size_t diag_line_no = 0;
  bool in_trace_block = false;
  while (std::getline(in, line)) {
    std::smatch m;
    if (std::regex_search(line, m, inline_diag)) {
      push({m[1].str(), m[2].str(),
            static_cast<std::size_t>(std::stoul(m[3].str()))});
      pending_diag = false;
      in_trace_block = false;
      continue;
    }
    if (std::regex_search(line, m, diag_line)) {
      pending_diag = true;
      diag_file = m[1].str();
      diag_line_no = static_cast<std::size_t>(std::stoul(m[2].str()));
      in_trace_block = false;
      continue;
    }
    if (pending_diag && std::regex_search(line, m, symbol_line)) {
      push({m[1].str(), diag_file, diag_line_no});
      pending_diag = false;
      continue;
    }
    if (std::regex_search(line, m, frame)) {
      if (!in_trace_block) {  // topmost frame of this trace block
        push({m[2].str(), m[3].str(),
              static_cast<std::size_t>(std::stoul(m[4].str()))});
      }
      in_trace_block = true;
      continue;
    }
    in_trace_block = false;
  }
  return out;
}

json to_json(const RepairRecord& record) {
  json attempts = json::array();
  for (const RepairAttempt& a : record.attempts) {
    json elements = json::array();
    for (const ErrorElement& e : a.elements) {
      elements.push_back({{"name", e.name}, {"file", e.file}, {"line", e.line}});
    }
    json knowledge = json::array();
    for (const model::KnowledgeItem& k : a.knowledge) {
      knowledge.push_back(model::to_json(k));
    }
    attempts.push_back({{"test_source", a.test_source},
                        {"outcome", runner::to_string(a.outcome)},
                        {"messages", a.messages},
                        {"elements", elements},
                        {"knowledge", knowledge}});
  }
  return json{{"attempts", attempts},
              {"final_status", to_string(record.final_status)},
              {"iterations", record.iterations},
              {"policy_note", record.policy_note}};
}

namespace {

// Frames carry bare file names; index keys are project-relative paths.
const index::IndexedSymbol* lookup_position(const index::SymbolIndex& index,
                                            const std::string& file,
                                            std::size_t line) {
  if (const auto* hit = index.find_enclosing(file, line)) return hit;
  for (const auto& [path, symbols] : index.by_file()) {
    const std::size_t slash = path.find_last_of('/');
    const std::string base =
        slash == std::string::npos ? path : path.substr(slash + 1);
    if (base != file) continue;
    if (const auto* hit = index.find_enclosing(path, line)) return hit;
  }
  return nullptr;
}

std::string refine_prompt(const model::FocalMethod& fm,
                          const std::string& test_source,
                          const RepairAttempt& attempt,
                          const model::ScenarioInstance& instance,
                          bool lock_oracle) {
  std::ostringstream prompt;
  prompt << "Focal method:\n```java\n" << fm.source << "\n```\n\n";
  prompt << "Failing test:\n```java\n" << test_source << "\n```\n\n";
  prompt << "Failure class: " << runner::to_string(attempt.outcome) << "\n";
  prompt << "Error messages:\n" << attempt.messages << "\n\n";
  prompt << "Relevant project knowledge:\n"
         << render_knowledge(attempt.knowledge) << "\n";
  prompt << "Scenario plan:\n" << instance.narrative << "\n\n";
  prompt << "Intended oracle:\n" << active_oracle(instance).statement << "\n\n";
  prompt << "Rewrite the complete test method (imports included if needed) "
            "so that it passes.";
  if (lock_oracle) {
    prompt << " The assertion encodes the intended oracle and is locked: "
              "keep it as is and fix the setup and calls around it.";
  }
  prompt << " Reply with only the code.";
  return prompt.str();
}

}  // namespace

RepairRecord repair(const model::TestCase& test,
                    const model::ScenarioInstance& instance,
                    const model::FocalMethod& fm, runner::Runner& run,
                    const index::SymbolIndex& index, llm::Gateway& gw,
                    int max_iter) {
  model::validate(instance);
  const std::string file_name = exam::test_file_name(test);
  const bool primary_active =
      active_oracle(instance).kind == model::OracleKind::primary;

  RepairRecord record;
  auto note = [&](const std::string& text) {
    if (!record.policy_note.empty()) record.policy_note += "; ";
    record.policy_note += text;
  };

  std::string current = test.source;
  for (int iter = 1; iter <= max_iter; ++iter) {
    const runner::RunOutcome outcome = run.run_candidate(current, file_name);
    RepairAttempt attempt;
    attempt.test_source = current;
    attempt.outcome = outcome.status;
    attempt.messages = outcome.messages;
    record.iterations = iter;

    if (outcome.status == runner::RunStatus::pass) {
      record.attempts.push_back(std::move(attempt));
      const runner::RunOutcome rerun = run.run_candidate(current, file_name);
      if (rerun.status == runner::RunStatus::pass) {
        record.final_status = FinalStatus::passing;
      } else {
        record.final_status = FinalStatus::failing_after_max;
        note("pass did not reproduce on re-run (" +
             std::string(runner::to_string(rerun.status)) + ")");
      }
      return record;
    }

    attempt.elements = extract_error_elements(outcome.messages);
    std::set<std::string> have;
    for (const ErrorElement& element : attempt.elements) {
      const index::IndexedSymbol* symbol =
          lookup_position(index, element.file, element.line);
      if (symbol) {
        if (have.insert(symbol->qualified).second) {
          attempt.knowledge.push_back(index::to_knowledge(
              *symbol, model::Provenance::stage3_error));
        }
        continue;
      }
      const auto items =
          index.query(element.name, index::QueryKind::any, /*scope=*/nullptr,
                      /*required=*/false, model::Provenance::stage3_error);
      if (!items.empty() && have.insert(items.front().symbol).second) {
        attempt.knowledge.push_back(items.front());
      }
    }

    const bool assertion_failed =
        outcome.status == runner::RunStatus::assertion_failure;
    record.attempts.push_back(attempt);

    if (assertion_failed && !primary_active) {
      note("alternative oracle's assertion failed; escalated to the "
           "developer, oracle left unchanged");
      record.final_status = FinalStatus::failing_after_max;
      return record;
    }
    if (assertion_failed && primary_active &&
        record.policy_note.find("primary oracle locked") == std::string::npos) {
      note("primary oracle locked during repair");
    }
    if (iter == max_iter) break;

    llm::CompletionRequest request;
    request.temperature = 0.0;
    request.tag = "forge.repair";
    request.messages.push_back(
        {llm::Role::system, "You repair failing Java unit tests."});
    request.messages.push_back(
        {llm::Role::user,
         refine_prompt(fm, current, attempt, instance,
                       assertion_failed && primary_active)});
    const json parsed = gw.complete_structured(request, single_test_schema());
    const std::string revised =
        rename_method(parsed["source"].get<std::string>(), test.name);
    if (collapse_ws(revised) == collapse_ws(current)) {
      note("identical resubmission; repair aborted");
      record.final_status = FinalStatus::failing_after_max;
      return record;
    }
    current = revised;
  }
  record.final_status = FinalStatus::failing_after_max;
  return record;
}

}  // namespace tgen::forge
