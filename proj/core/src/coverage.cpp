#include "tgen/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "tgen/assignment.hpp"
#include "tgen/error.hpp"
#include "tgen/schemas.hpp"

namespace tgen::coverage {

namespace {

double mean_of(const std::vector<GtScore>& scores) {
  if (scores.empty()) return 0.0;
  double sum = 0.0;
  for (const GtScore& s : scores) sum += s.score;
  return sum / static_cast<double>(scores.size());
}

}  // namespace

void validate(const MutantKillSet& ks) {
  for (const std::string& m : ks.killed) {
    if (!ks.universe.count(m)) {
      throw invariant_violation("killed subset of universe");
    }
  }
}

double pairwise_score(const MutantKillSet& gt, const MutantKillSet& gen) {
  if (gt.killed.empty()) {
    throw Error(ErrorKind::empty_ground_truth_kill_set,
                "ground-truth test '" + gt.test_id + "' kills no mutants");
  }
  std::size_t common = 0;
  for (const std::string& m : gt.killed) {
    if (gen.killed.count(m)) ++common;
  }
  return static_cast<double>(common) / static_cast<double>(gt.killed.size());
}

const char* to_string(Metric metric) {
  switch (metric) {
    case Metric::mutation_based: return "mutation_based";
    case Metric::llm_assessed: return "llm_assessed";
  }
  return "mutation_based";
}

Metric metric_from_string(const std::string& s) {
  if (s == "mutation_based") return Metric::mutation_based;
  if (s == "llm_assessed") return Metric::llm_assessed;
  throw Error(ErrorKind::schema_error, "unknown coverage metric: " + s);
}

MutationMatch match_mutation(const std::vector<MutantKillSet>& gt_sets,
                             const std::vector<MutantKillSet>& gen_sets) {
  std::vector<std::vector<double>> weights(
      gt_sets.size(), std::vector<double>(gen_sets.size(), 0.0));
  for (std::size_t i = 0; i < gt_sets.size(); ++i) {
    for (std::size_t j = 0; j < gen_sets.size(); ++j) {
      weights[i][j] = pairwise_score(gt_sets[i], gen_sets[j]);
    }
  }
  const AssignmentResult assignment = max_weight_assignment(weights);

  MutationMatch out;
  out.total = assignment.total;
  for (std::size_t i = 0; i < gt_sets.size(); ++i) {
    const int j = assignment.match_of_row[i];
    GtScore gs;
    gs.gt_id = gt_sets[i].test_id;
    if (j >= 0) {
      gs.score = weights[i][static_cast<std::size_t>(j)];
      out.matching.push_back(
          {gt_sets[i].test_id, gen_sets[static_cast<std::size_t>(j)].test_id,
           gs.score});
    }
    out.per_gt.push_back(gs);
  }
  return out;
}

void validate(const CoverageReport& report) {
  if (report.focal_id.empty()) {
    throw invariant_violation("focal id non-empty");
  }
  const double mean = mean_of(report.per_gt);
  if (std::abs(mean - report.aggregate) > 1e-9) {
    throw invariant_violation("aggregate is mean of per-gt scores");
  }
  std::set<std::string> gts, gens;
  for (const MatchEntry& m : report.matching) {
    if (report.metric == Metric::mutation_based && !gts.insert(m.gt_id).second) {
      throw invariant_violation("matching injective");
    }
    if (!gens.insert(m.gen_id).second) {
      throw invariant_violation("matching injective");
    }
  }
}

CoverageReport mutation_report(const std::string& focal_id,
                               const std::vector<MutantKillSet>& gt_sets,
                               const std::vector<MutantKillSet>& gen_sets) {
  CoverageReport report;
  report.focal_id = focal_id;
  report.metric = Metric::mutation_based;

  std::vector<MutantKillSet> scorable;
  for (const MutantKillSet& gt : gt_sets) {
    validate(gt);
    if (gt.killed.empty()) {
      report.excluded_gt.push_back(gt.test_id);
    } else {
      scorable.push_back(gt);
    }
  }
  for (const MutantKillSet& gen : gen_sets) validate(gen);

  MutationMatch match = match_mutation(scorable, gen_sets);
  report.per_gt = std::move(match.per_gt);
  report.matching = std::move(match.matching);
  report.aggregate = mean_of(report.per_gt);
  return report;
}

namespace {

std::string judge_prompt(const JudgedTest& gt,
                         const std::vector<JudgedTest>& pool) {
  std::ostringstream out;
  out << "Reference test:\n```java\n" << gt.source << "\n```\n\n";
  out << "Candidate tests:\n";
  for (const JudgedTest& t : pool) {
    out << "[" << t.id << "]\n```java\n" << t.source << "\n```\n";
  }
  out << "\nDo the candidate tests, alone or together, exercise the same "
         "test scenario as the reference test?\n"
         "Answer in exactly one of the two forms:\n"
         "MATCH: yes\ntests: [comma-separated candidate ids]\n"
         "or\nMATCH: no\n";
  return out.str();
}

}  // namespace

CoverageReport llm_assessed(const std::string& focal_id,
                            const std::vector<JudgedTest>& gt_tests,
                            const std::vector<JudgedTest>& gen_tests,
                            llm::Gateway& judge) {
  CoverageReport report;
  report.focal_id = focal_id;
  report.metric = Metric::llm_assessed;

  std::vector<JudgedTest> pool = gen_tests;
  for (const JudgedTest& gt : gt_tests) {
    GtScore gs;
    gs.gt_id = gt.id;
    if (!pool.empty()) {
      std::vector<std::string> pool_ids;
      for (const JudgedTest& t : pool) pool_ids.push_back(t.id);

      llm::CompletionRequest request;
      request.temperature = 0.0;
      request.tag = "coverage.judge";
      request.messages.push_back(
          {llm::Role::system,
           "You review unit tests. Judge scenario equivalence strictly from "
           "the test bodies; follow the requested answer format exactly."});
      request.messages.push_back({llm::Role::user, judge_prompt(gt, pool)});

      const json verdict = judge.complete_structured(
          request, llm::judge_verdict_schema(pool_ids));
      if (verdict.at("match").get<bool>()) {
        gs.score = 1.0;
        for (const auto& id_node : verdict.at("tests")) {
          const std::string id = id_node.get<std::string>();
          report.matching.push_back({gt.id, id, 1.0});
          pool.erase(std::remove_if(
                         pool.begin(), pool.end(),
                         [&](const JudgedTest& t) { return t.id == id; }),
                     pool.end());
        }
      }
    }
    report.per_gt.push_back(gs);
  }
  report.aggregate = mean_of(report.per_gt);
  return report;
}

// ---- mutation-report ingestion ----

namespace {

bool known_status(const std::string& s) {
  return s == "KILLED" || s == "SURVIVED" || s == "NO_COVERAGE" ||
         s == "TIMED_OUT";
}

MutationReport parse_canonical(const std::string& content) {
  json doc;
  try {
    doc = json::parse(content);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse_error,
                std::string("mutation report is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("mutants") ||
      !doc["mutants"].is_array()) {
    throw Error(ErrorKind::schema_error,
                "mutation report: missing key: mutants");
  }
  MutationReport report;
  std::size_t pos = 0;
  for (const json& m : doc["mutants"]) {
    const std::string where = "mutant " + std::to_string(pos);
    if (!m.is_object()) {
      throw Error(ErrorKind::schema_error, where + ": not an object");
    }
    for (const char* key : {"id", "class", "mutator", "status"}) {
      if (!m.contains(key) || !m[key].is_string()) {
        throw Error(ErrorKind::schema_error,
                    where + ": missing key: " + std::string(key));
      }
    }
    if (!m.contains("line") || !m["line"].is_number_unsigned()) {
      throw Error(ErrorKind::schema_error, where + ": missing key: line");
    }
    const std::string id = m["id"].get<std::string>();
    if (id.empty()) {
      throw Error(ErrorKind::schema_error, where + ": empty id");
    }
    const std::string status = m["status"].get<std::string>();
    if (!known_status(status)) {
      throw Error(ErrorKind::schema_error,
                  where + ": unknown status '" + status + "'");
    }
    if (!report.universe.insert(id).second) {
      throw Error(ErrorKind::schema_error, where + ": duplicate id '" + id + "'");
    }
    if (status == "KILLED") {
      if (!m.contains("killing_tests") || !m["killing_tests"].is_array()) {
        throw Error(ErrorKind::schema_error,
                    where + ": KILLED without killing_tests");
      }
      for (const json& t : m["killing_tests"]) {
        if (!t.is_string() || t.get<std::string>().empty()) {
          throw Error(ErrorKind::schema_error,
                      where + ": killing_tests entries must be test ids");
        }
        report.kills[t.get<std::string>()].insert(id);
      }
    }
    ++pos;
  }
  return report;
}

MutationReport parse_xml(const std::string& content) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(content);
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorKind::parse_error,
                std::string("mutation report is not valid XML: ") + e.what());
  }
  auto mutations = tree.get_child_optional("mutations");
  if (!mutations) {
    throw Error(ErrorKind::schema_error,
                "mutation report: missing mutations element");
  }
  MutationReport report;
  std::map<std::string, int> ordinals;
  std::size_t pos = 0;
  for (const auto& [key, node] : *mutations) {
    if (key == "<xmlattr>" || key == "<xmlcomment>") continue;
    const std::string where = "mutation " + std::to_string(pos);
    if (key != "mutation") {
      throw Error(ErrorKind::schema_error,
                  where + ": unexpected element '" + key + "'");
    }
    const std::string status = node.get<std::string>("<xmlattr>.status", "");
    if (!known_status(status)) {
      throw Error(ErrorKind::schema_error,
                  where + ": unknown status '" + status + "'");
    }
    const std::string cls = node.get<std::string>("mutatedClass", "");
    const std::string line = node.get<std::string>("lineNumber", "");
    const std::string mutator = node.get<std::string>("mutator", "");
    if (cls.empty() || line.empty() || mutator.empty()) {
      throw Error(ErrorKind::schema_error,
                  where + ": missing mutatedClass/lineNumber/mutator");
    }
    const std::string base = cls + "#" + line + "#" + mutator;
    const int ordinal = ordinals[base]++;
    const std::string id = base + "#" + std::to_string(ordinal);
    report.universe.insert(id);
    if (status == "KILLED") {
      auto killing = node.get_child_optional("killingTest");
      if (!killing) {
        throw Error(ErrorKind::schema_error,
                    where + ": KILLED without killingTest");
      }
      std::string tests = killing->get_value<std::string>();
      std::size_t start = 0;
      while (start <= tests.size()) {
        const std::size_t bar = tests.find('|', start);
        const std::string test =
            tests.substr(start, bar == std::string::npos ? std::string::npos
                                                         : bar - start);
        if (!test.empty()) report.kills[test].insert(id);
        if (bar == std::string::npos) break;
        start = bar + 1;
      }
    }
    ++pos;
  }
  return report;
}

}  // namespace

MutationReport parse_mutation_report(const std::string& content,
                                     ReportProfile profile) {
  switch (profile) {
    case ReportProfile::canonical_json: return parse_canonical(content);
    case ReportProfile::xml: return parse_xml(content);
  }
  throw Error(ErrorKind::schema_error, "unknown report profile");
}

MutationReport ingest_mutation_report(const std::filesystem::path& path,
                                      ReportProfile profile) {
  return parse_mutation_report(read_file(path), profile);
}

std::vector<MutantKillSet> kill_sets_for(
    const MutationReport& report, const std::vector<std::string>& test_ids) {
  std::vector<MutantKillSet> out;
  for (const std::string& id : test_ids) {
    MutantKillSet ks;
    ks.test_id = id;
    ks.universe = report.universe;
    auto it = report.kills.find(id);
    if (it != report.kills.end()) ks.killed = it->second;
    out.push_back(std::move(ks));
  }
  return out;
}

std::vector<std::string> killing_test_ids(const MutationReport& report) {
  std::vector<std::string> out;
  for (const auto& [test, mutants] : report.kills) {
    if (!mutants.empty()) out.push_back(test);
  }
  return out;  // map iteration is already sorted
}

json to_json(const CoverageReport& report) {
  validate(report);
  json per_gt = json::array();
  for (const GtScore& s : report.per_gt) {
    per_gt.push_back({{"test", s.gt_id}, {"score", s.score}});
  }
  json matching = json::array();
  for (const MatchEntry& m : report.matching) {
    matching.push_back({{"gt", m.gt_id}, {"gen", m.gen_id}, {"score", m.score}});
  }
  return json{{"focal_id", report.focal_id},
              {"metric", to_string(report.metric)},
              {"per_gt", per_gt},
              {"matching", matching},
              {"excluded_gt", report.excluded_gt},
              {"aggregate", report.aggregate}};
}

CoverageReport coverage_report_from_json(const json& doc) {
  CoverageReport report;
  try {
    report.focal_id = doc.at("focal_id").get<std::string>();
    report.metric = metric_from_string(doc.at("metric").get<std::string>());
    for (const json& s : doc.at("per_gt")) {
      report.per_gt.push_back(
          {s.at("test").get<std::string>(), s.at("score").get<double>()});
    }
    for (const json& m : doc.at("matching")) {
      report.matching.push_back({m.at("gt").get<std::string>(),
                                 m.at("gen").get<std::string>(),
                                 m.at("score").get<double>()});
    }
    report.excluded_gt =
        doc.at("excluded_gt").get<std::vector<std::string>>();
    report.aggregate = doc.at("aggregate").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::schema_error,
                std::string("coverage report: ") + e.what());
  }
  validate(report);
  return report;
}

}  // namespace tgen::coverage
