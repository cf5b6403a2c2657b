#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tgen/gateway.hpp"
#include "tgen/jsonio.hpp"

namespace tgen::coverage {

// Kill set of one test over the mutant universe of a focal class.
struct MutantKillSet {
  std::string test_id;
  std::set<std::string> killed;
  std::set<std::string> universe;
  bool operator==(const MutantKillSet&) const = default;
};

// killed ⊆ universe.
void validate(const MutantKillSet& ks);

// |gt.killed ∩ gen.killed| / |gt.killed|. The ground-truth kill set must be
// non-empty (degenerate ground-truth tests are excluded upstream).
double pairwise_score(const MutantKillSet& gt, const MutantKillSet& gen);

enum class Metric { mutation_based, llm_assessed };
const char* to_string(Metric metric);
Metric metric_from_string(const std::string& s);

struct MatchEntry {
  std::string gt_id;
  std::string gen_id;
  double score = 0.0;
  bool operator==(const MatchEntry&) const = default;
};

struct GtScore {
  std::string gt_id;
  double score = 0.0;
  bool operator==(const GtScore&) const = default;
};

struct MutationMatch {
  std::vector<MatchEntry> matching;  // matched pairs only, injective both ways
  std::vector<GtScore> per_gt;       // every ground-truth test, input order
  double total = 0.0;
};

// Maximum-total-weight injective matching under the pairwise score; among
// equal-weight matchings picks the lexicographically smallest assignment by
// (gt index, gen index), with "unmatched" ordered after every real partner.
// Every gt set must be non-empty.
MutationMatch match_mutation(const std::vector<MutantKillSet>& gt_sets,
                             const std::vector<MutantKillSet>& gen_sets);

struct CoverageReport {
  std::string focal_id;
  Metric metric = Metric::mutation_based;
  std::vector<GtScore> per_gt;       // scored ground-truth tests, source order
  std::vector<MatchEntry> matching;  // mutation: pairs; llm: credited gen ids
  std::vector<std::string> excluded_gt;  // empty-kill-set gt, kept out of mean
  double aggregate = 0.0;                // mean of per_gt scores, 0 when none
  bool operator==(const CoverageReport&) const = default;
};

void validate(const CoverageReport& report);

// Mutation-based coverage. Ground-truth tests with empty kill sets are moved
// to excluded_gt and do not enter the aggregate's denominator.
CoverageReport mutation_report(const std::string& focal_id,
                               const std::vector<MutantKillSet>& gt_sets,
                               const std::vector<MutantKillSet>& gen_sets);

struct JudgedTest {
  std::string id;
  std::string source;
};

// Judge-driven coverage: ground-truth tests in the given order, each judged
// against the remaining pool of generated tests; a fulfilled verdict scores 1
// and removes the cited tests from the pool. Judge calls run at temperature 0
// under the "coverage.judge" tag; an empty pool scores 0 without a call.
CoverageReport llm_assessed(const std::string& focal_id,
                            const std::vector<JudgedTest>& gt_tests,
                            const std::vector<JudgedTest>& gen_tests,
                            llm::Gateway& judge);

// ---- mutation-report ingestion ----

enum class ReportProfile { canonical_json, xml };

struct MutationReport {
  std::map<std::string, std::set<std::string>> kills;  // test id -> mutants
  std::set<std::string> universe;                      // every mutant id
  bool operator==(const MutationReport&) const = default;
};

// canonical_json: {"mutants": [{id, class, line, mutator, status,
// killing_tests}]} with status in {KILLED, SURVIVED, NO_COVERAGE, TIMED_OUT};
// a KILLED mutant must carry killing_tests. xml: <mutations><mutation
// status=...><mutatedClass/><lineNumber/><mutator/><killingTest/> with mutant
// ids synthesized as class#line#mutator#ordinal and killingTest split on '|'.
MutationReport parse_mutation_report(const std::string& content,
                                     ReportProfile profile);
MutationReport ingest_mutation_report(const std::filesystem::path& path,
                                      ReportProfile profile);

// One kill set per requested test id (absent ids get an empty kill set);
// universe is shared.
std::vector<MutantKillSet> kill_sets_for(const MutationReport& report,
                                         const std::vector<std::string>& test_ids);

// Test ids the report attributes at least one kill to, sorted.
std::vector<std::string> killing_test_ids(const MutationReport& report);

json to_json(const CoverageReport& report);
CoverageReport coverage_report_from_json(const json& doc);

}  // namespace tgen::coverage
