#include "tgen/scenario.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "tgen/error.hpp"
#include "tgen/schemas.hpp"
#include "tgen/serialize.hpp"

namespace tgen::scenario {

std::string default_scaffold() {
  return
      "# Instruction\n"
      "Given the Java focal method below, produce a test scenario template "
      "for it with reference to the provided test case.\n"
      "A test scenario template is a general test plan that captures what "
      "the test validates across diverse scenarios. It consists of concise "
      "numbered steps in natural language, optionally referencing minimal "
      "program elements. Each step carries: an action — an imperative "
      "instruction for a tester; zero or more variation points — factors "
      "that may vary, either concrete code elements or abstract choices, "
      "each instantiable into a concrete setting; and optional dependencies "
      "linking the step to variation points declared in earlier steps.\n"
      "\n"
      "# Focal Method\n"
      "{FOCAL_METHOD}\n"
      "\n"
      "# Focal Method Context\n"
      "{FILE_SKELETON}\n"
      "\n"
      "# Initial Test Case\n"
      "{INITIAL_TEST}\n"
      "\n"
      "# Project Knowledge\n"
      "{KNOWLEDGE}\n"
      "\n"
      "# Rules for Variation Point Identification\n"
      "{RULES}\n"
      "\n"
      "# Requirements\n"
      "1. First output your analysis: what the test validates, which factors "
      "may vary, and what information is still missing.\n"
      "2. If you require more project knowledge (e.g., a constructor, "
      "method, or field) to identify variation points accurately, output "
      "only a query block in this exact format, without commentary:\n"
      "QUERIES:\n"
      "- <kind> <name>\n"
      "where <kind> is one of class, constructor, method, field, family.\n"
      "3. If no more information is required, output the template in this "
      "exact format:\n"
      "TEMPLATE:\n"
      "STEP 1: <action>\n"
      "  VP <name>: <description> [CANDIDATES: <a> | <b>]\n"
      "  DEP <vp_name> <- STEP <m>\n"
      "\n"
      "STEP 2: <action>\n";
}

model::RulePrompt default_rule_prompt() {
  model::RulePrompt prompt;
  prompt.scaffold = default_scaffold();
  prompt.version = 0;
  return prompt;
}

namespace {

std::string render_knowledge_item(const model::KnowledgeItem& item) {
  std::ostringstream out;
  out << "SYMBOL " << item.symbol << " (" << model::to_string(item.kind)
      << ")\n" << item.definition << "\n";
  if (!item.usages.empty()) {
    out << "used at:";
    for (const model::UsageSite& u : item.usages) {
      out << " " << u.file << ":" << u.line;
    }
    out << "\n";
  }
  return out.str();
}

std::string render_knowledge_section(
    const std::vector<model::KnowledgeItem>& knowledge, std::size_t budget) {
  if (knowledge.empty()) return "none provided";
  std::string out;
  std::size_t kept = 0;
  for (const model::KnowledgeItem& item : knowledge) {
    const std::string rendered = render_knowledge_item(item);
    if (out.size() + rendered.size() > budget) break;
    out += rendered;
    ++kept;
  }
  if (kept == 0) {
    throw Error(ErrorKind::context_overflow,
                "knowledge budget of " + std::to_string(budget) +
                    " chars cannot fit even the top-ranked item");
  }
  if (kept < knowledge.size()) {
    out += "[truncated: " + std::to_string(knowledge.size() - kept) +
           " lower-ranked knowledge items omitted]\n";
  }
  return out;
}

void replace_all(std::string& text, const std::string& key,
                 const std::string& value) {
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    text.replace(pos, key.size(), value);
    pos += value.size();
  }
}

std::string render_rules(const model::RulePrompt& rules) {
  if (rules.rules.empty()) return "(no additional rules)";
  std::string out;
  for (std::size_t i = 0; i < rules.rules.size(); ++i) {
    out += std::to_string(i + 1) + ". " + rules.rules[i] + "\n";
  }
  return out;
}

}  // namespace

llm::CompletionRequest build_template_prompt(
    const model::FocalMethod& fm, const model::TestCase& tc,
    const std::vector<model::KnowledgeItem>& knowledge,
    const model::RulePrompt& rules, std::size_t knowledge_budget) {
  model::validate(rules);
  std::string body = rules.scaffold;
  replace_all(body, "{FOCAL_METHOD}", "```java\n" + fm.source + "\n```");
  replace_all(body, "{FILE_SKELETON}", "```java\n" + fm.file_skeleton + "\n```");
  replace_all(body, "{INITIAL_TEST}", "```java\n" + tc.source + "\n```");
  replace_all(body, "{KNOWLEDGE}",
              render_knowledge_section(knowledge, knowledge_budget));
  replace_all(body, "{RULES}", render_rules(rules));

  llm::CompletionRequest request;
  request.temperature = 0.0;
  request.tag = "scenario.template";
  request.messages.push_back(
      {llm::Role::system,
       "You generalize Java unit tests into test scenario templates."});
  request.messages.push_back({llm::Role::user, body});
  return request;
}

TemplateGeneration generate_template(
    const model::FocalMethod& fm, const model::TestCase& tc,
    std::vector<model::KnowledgeItem> knowledge, const model::RulePrompt& rules,
    llm::Gateway& gw, const index::SymbolIndex& index, int max_queries,
    std::size_t knowledge_budget) {
  TemplateGeneration out;
  out.knowledge = std::move(knowledge);
  std::set<std::string> have;
  for (const model::KnowledgeItem& item : out.knowledge) {
    have.insert(item.symbol);
  }

  while (true) {
    const llm::CompletionRequest request = build_template_prompt(
        fm, tc, out.knowledge, rules, knowledge_budget);
    const json turn =
        gw.complete_structured(request, llm::scenario_turn_schema());

    if (turn.contains("template")) {
      out.tmpl = model::parse_template(turn["template"].get<std::string>(),
                                       fm.id, std::to_string(rules.version));
      return out;
    }

    if (out.query_rounds >= max_queries) {
      throw Error(ErrorKind::query_budget_exceeded,
                  "template generation exceeded " +
                      std::to_string(max_queries) + " query rounds");
    }
    ++out.query_rounds;
    for (const json& q : turn.at("queries")) {
      const auto items = index.query(
          q.at("name").get<std::string>(),
          index::query_kind_from_string(q.at("kind").get<std::string>()),
          /*scope=*/nullptr, /*required=*/false,
          model::Provenance::stage2_query);
      for (const model::KnowledgeItem& item : items) {
        if (have.insert(item.symbol).second) out.knowledge.push_back(item);
      }
    }
  }
}

json to_json(const SettingsBundle& bundle) {
  json deps = json::array();
  for (const model::SettingDep& d : bundle.deps) {
    deps.push_back({{"vp", d.vp}, {"step", d.step}, {"value", d.value}});
  }
  return json{{"settings", bundle.settings},
              {"deps", deps},
              {"primary_oracle", bundle.primary_oracle},
              {"alternative_oracles", bundle.alternative_oracles}};
}

SettingsBundle bundle_from_json(const json& doc) {
  SettingsBundle bundle;
  try {
    bundle.settings =
        doc.at("settings").get<std::map<std::string, std::string>>();
    bundle.primary_oracle = doc.at("primary_oracle").get<std::string>();
    for (const json& d : doc.value("deps", json::array())) {
      bundle.deps.push_back({d.at("vp").get<std::string>(),
                             d.at("step").get<int>(),
                             d.value("value", std::string())});
    }
    bundle.alternative_oracles =
        doc.value("alternative_oracles", std::vector<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema_error,
                std::string("settings bundle: ") + e.what());
  }
  return bundle;
}

std::string template_ref(const model::ScenarioTemplate& tmpl) {
  return "template:" + fnv1a_hex(model::serialize_artifact(tmpl));
}

model::ScenarioInstance instantiate(const model::ScenarioTemplate& tmpl,
                                    const SettingsBundle& bundle) {
  model::validate(tmpl);
  const std::vector<std::string> declared = model::declared_vp_names(tmpl);
  const std::set<std::string> declared_set(declared.begin(), declared.end());

  for (const auto& [vp, setting] : bundle.settings) {
    if (!declared_set.count(vp)) {
      throw Error(ErrorKind::validation_failure,
                  "setting refers to undeclared variation point '" + vp + "'");
    }
  }
  for (const std::string& vp : declared) {
    if (!bundle.settings.count(vp)) {
      throw Error(ErrorKind::validation_failure,
                  "missing setting for variation point '" + vp + "'");
    }
  }
  const int max_step = static_cast<int>(tmpl.steps.size());
  for (const model::SettingDep& dep : bundle.deps) {
    if (!declared_set.count(dep.vp)) {
      throw Error(ErrorKind::validation_failure,
                  "dependency refers to undeclared variation point '" +
                      dep.vp + "'");
    }
    if (dep.step < 1 || dep.step > max_step) {
      throw Error(ErrorKind::validation_failure,
                  "dependency step " + std::to_string(dep.step) +
                      " is not a template step");
    }
  }
  if (bundle.primary_oracle.empty()) {
    throw Error(ErrorKind::validation_failure, "primary oracle is empty");
  }

  model::ScenarioInstance ins;
  ins.template_ref = template_ref(tmpl);
  ins.settings = bundle.settings;
  ins.setting_deps = bundle.deps;
  ins.oracles.push_back({model::OracleKind::primary, bundle.primary_oracle,
                         model::OracleBasis::implementation_deduced});
  for (const std::string& alt : bundle.alternative_oracles) {
    ins.oracles.push_back({model::OracleKind::alternative, alt,
                           model::OracleBasis::requirement_inferred});
  }

  std::ostringstream narrative;
  for (const model::TemplateStep& step : tmpl.steps) {
    if (step.step_id > 1) narrative << "\n";
    narrative << step.action;
    if (!step.vps.empty()) {
      narrative << " [with ";
      for (std::size_t i = 0; i < step.vps.size(); ++i) {
        if (i) narrative << ", ";
        narrative << step.vps[i].name << "="
                  << bundle.settings.at(step.vps[i].name);
      }
      narrative << "]";
    }
  }
  ins.narrative = narrative.str();
  ins.active_oracle = 0;

  model::validate(ins);
  model::validate_against(ins, tmpl);
  return ins;
}

CrystallizeResult crystallize(const model::ScenarioTemplate& tmpl,
                              const model::FocalMethod& fm,
                              const model::TestCase& tc,
                              const std::vector<model::KnowledgeItem>& knowledge,
                              llm::Gateway& gw, std::size_t ceiling) {
  model::validate(tmpl);

  std::ostringstream prompt;
  prompt << "Test scenario template:\n"
         << model::render_template_text(tmpl) << "\n";
  prompt << "Focal method:\n```java\n" << fm.source << "\n```\n\n";
  prompt << "Initial test:\n```java\n" << tc.source << "\n```\n\n";
  prompt << "Project knowledge:\n";
  if (knowledge.empty()) {
    prompt << "none provided\n";
  } else {
    for (const model::KnowledgeItem& item : knowledge) {
      prompt << render_knowledge_item(item);
    }
  }
  prompt << "\nInstantiate the template into concrete test scenarios. Reply "
            "with only a JSON array of at most "
         << ceiling
         << " bundles, one per intended scenario:\n"
            "[{\"settings\": {\"<vp>\": \"<setting>\"}, \"deps\": [{\"vp\": "
            "\"<vp>\", \"step\": <m>, \"value\": \"<resolved value>\"}], "
            "\"primary_oracle\": \"<assertion deduced from the "
            "implementation>\", \"alternative_oracles\": [\"<alternative "
            "assertion>\"]}]\n"
            "Give every declared variation point a setting and use only "
            "declared variation point names.";

  llm::CompletionRequest request;
  request.temperature = 0.0;
  request.tag = "scenario.bundles";
  request.messages.push_back(
      {llm::Role::system,
       "You instantiate test scenario templates into structured settings "
       "bundles."});
  request.messages.push_back({llm::Role::user, prompt.str()});

  const json parsed = gw.complete_structured(request, llm::bundles_schema());

  CrystallizeResult result;
  std::size_t taken = 0;
  for (const json& entry : parsed) {
    if (taken >= ceiling) break;
    ++taken;
    SettingsBundle bundle = bundle_from_json(entry);
    try {
      result.instances.push_back(instantiate(tmpl, bundle));
      result.bundles.push_back(std::move(bundle));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::validation_failure) throw;
      result.rejected.push_back(e.message());
    }
  }
  if (result.instances.empty()) {
    throw Error(ErrorKind::no_valid_bundles,
                "no settings bundle survived validation (" +
                    std::to_string(result.rejected.size()) + " rejected)");
  }
  return result;
}

model::ScenarioInstance select_oracle(model::ScenarioInstance instance,
                                      std::optional<std::size_t> choice) {
  model::validate(instance);
  if (!choice) {
    instance.active_oracle = 0;
    return instance;
  }
  if (*choice >= instance.oracles.size()) {
    throw Error(ErrorKind::choice_out_of_range,
                "oracle choice " + std::to_string(*choice) +
                    " out of range (" +
                    std::to_string(instance.oracles.size()) + " oracles)");
  }
  instance.active_oracle = *choice;
  return instance;
}

}  // namespace tgen::scenario
