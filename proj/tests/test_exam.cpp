#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <memory>
#include <set>

#include "helpers.hpp"
#include "tgen/error.hpp"
#include "tgen/exam.hpp"
#include "tgen/gateway.hpp"
#include "tgen/providers.hpp"

using namespace tgen;
using testutil::project_index;

namespace {

struct Scripted {
  std::shared_ptr<llm::ScriptedProvider> provider =
      std::make_shared<llm::ScriptedProvider>();
  llm::Gateway gw{provider};
};

exam::OracleExam route_exam(std::uint64_t seed = 42) {
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase tc = testutil::route_test(fm);
  std::vector<exam::ExamOption> filtered = {
      {"assertFalse(route.matches(HttpMethod.GET, \"/users/7/posts\"));",
       exam::OptionStatus::valid_wrong},
      {"assertTrue(route.matches(HttpMethod.POST, \"/users/7/posts\"));",
       exam::OptionStatus::valid_wrong},
      {"assertTrue(route.matchez(HttpMethod.GET, \"/users/7/posts\"));",
       exam::OptionStatus::discarded_compile},
  };
  return exam::build_exam(tc, tc.assertions[0], filtered, seed);
}

std::string answer(std::size_t one_based) {
  return "{\"answer\": " + std::to_string(one_based) + "}";
}

}  // namespace

TEST_CASE("assertion substitution splices the replacement bytes") {
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase tc = testutil::route_test(fm);
  const std::string swapped =
      exam::substitute_assertion(tc, tc.assertions[0], "/* MASKED ORACLE */");
  CHECK(swapped.find("/* MASKED ORACLE */") != std::string::npos);
  CHECK(swapped.find(tc.assertions[0].statement) == std::string::npos);
  // everything else survives
  CHECK(swapped.find(tc.assertions[1].statement) != std::string::npos);

  model::AssertionSite bogus{"assertTrue(nothing);", 2, 20};
  CHECK_THROWS_AS(exam::substitute_assertion(tc, bogus, "x"), Error);
}

TEST_CASE("candidate file names derive from the declaring type") {
  const model::FocalMethod fm = testutil::route_focal();
  model::TestCase tc = testutil::route_test(fm);
  CHECK(exam::test_file_name(tc) == "RouteTest.java");
  tc.id = "not-an-id";
  CHECK(exam::test_file_name(tc) == "Candidate.java");
}

TEST_CASE("wrong-oracle generation trims, dedupes, and caps") {
  Scripted s;
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase tc = testutil::route_test(fm);
  const model::AssertionSite& site = tc.assertions[0];
  const json batch = json::array({"assertFalse(a);", "assertFalse(a);",
                                  site.statement, "", "assertTrue(b);"});
  s.provider->enqueue(batch.dump(), "exam.wrong_oracles");
  const auto variants = exam::generate_wrong_oracles(fm, tc, site, s.gw, 10);
  CHECK(variants == std::vector<std::string>{"assertFalse(a);",
                                             "assertTrue(b);"});
  CHECK(s.gw.calls("exam.wrong_oracles") == 1);
}

TEST_CASE("wrong-oracle generation revises once, then gives up") {
  Scripted s;
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase tc = testutil::route_test(fm);
  const model::AssertionSite& site = tc.assertions[0];

  SUBCASE("revision rescues the batch") {
    s.provider->enqueue(json::array({site.statement}).dump());  // all unusable
    s.provider->enqueue("[\"assertFalse(q);\"]");
    const auto variants = exam::generate_wrong_oracles(fm, tc, site, s.gw, 5);
    CHECK(variants == std::vector<std::string>{"assertFalse(q);"});
    CHECK(s.gw.calls("exam.wrong_oracles") == 2);
  }
  SUBCASE("two unusable batches raise zero_candidates") {
    s.provider->enqueue("[]").enqueue("[\"\"]");
    try {
      exam::generate_wrong_oracles(fm, tc, site, s.gw, 5);
      FAIL("expected zero_candidates");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::zero_candidates);
    }
  }
  SUBCASE("cap respects the variant budget") {
    s.provider->enqueue(
        "[\"assertFalse(a);\", \"assertFalse(b);\", \"assertFalse(c);\"]");
    const auto variants = exam::generate_wrong_oracles(fm, tc, site, s.gw, 2);
    CHECK(variants.size() == 2);
  }
}

TEST_CASE("candidate filtering classifies through the project runner") {
  testutil::TempDir tmp;
  runner::Runner run(testutil::project_config("routeproj"),
                     &project_index("routeproj"), 2, tmp.path());
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase tc = testutil::route_test(fm);
  const std::vector<std::string> variants = {
      "assertFalse(route.matches(HttpMethod.GET, \"/users/7/posts\"));",
      "assertTrue(route.matches(HttpMethod.GET, \"/users/8/posts\"));",
      "assertTrue(route.matchez(HttpMethod.GET, \"/users/7/posts\"));",
      "assertTrue(route.matches(null, \"/users/7/posts\"));",
  };
  const auto options =
      exam::filter_candidates(tc, tc.assertions[0], variants, run);
  REQUIRE(options.size() == 4);
  CHECK(options[0].status == exam::OptionStatus::valid_wrong);
  CHECK(options[1].status == exam::OptionStatus::discarded_passes);
  CHECK(options[2].status == exam::OptionStatus::discarded_compile);
  CHECK(options[3].status == exam::OptionStatus::discarded_exec);
}

TEST_CASE("exam assembly shuffles deterministically and keeps the audit tail") {
  const exam::OracleExam a = route_exam(42);
  const exam::OracleExam b = route_exam(42);
  CHECK(a == b);

  CHECK(a.presented == 3);           // original + two valid wrong
  REQUIRE(a.options.size() == 4);    // discarded option appended
  CHECK(a.options[3].status == exam::OptionStatus::discarded_compile);
  CHECK(a.correct_index < a.presented);
  CHECK(a.options[a.correct_index].statement ==
        a.target_assertion.statement);

  // a different seed eventually yields a different arrangement
  bool differs = false;
  for (std::uint64_t seed = 0; seed < 16 && !differs; ++seed) {
    differs = route_exam(seed).options != a.options;
  }
  CHECK(differs);
}

TEST_CASE("exam assembly requires at least one valid wrong option") {
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase tc = testutil::route_test(fm);
  const std::vector<exam::ExamOption> only_discarded = {
      {"assertTrue(broken);", exam::OptionStatus::discarded_compile}};
  CHECK_THROWS_AS(exam::build_exam(tc, tc.assertions[0], only_discarded, 1),
                  Error);
}

TEST_CASE("exams serialize and parse") {
  const exam::OracleExam a = route_exam(7);
  CHECK(exam::parse_exam(exam::serialize_exam(a)) == a);
}

TEST_CASE("a correct first answer passes in one iteration") {
  Scripted s;
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase tc = testutil::route_test(fm);
  const exam::OracleExam ex = route_exam();
  s.provider->enqueue(answer(ex.correct_index + 1), "exam.turn");
  const exam::ExamOutcome out =
      exam::run_exam(ex, s.gw, project_index("routeproj"), fm, tc);
  CHECK(out.verdict == exam::Verdict::passed);
  CHECK(out.iterations_used == 1);
  REQUIRE(out.trace.size() == 1);
  CHECK(out.trace[0].kind == "answer");
  CHECK(out.trace[0].detail.at("correct").get<bool>());
  CHECK(out.knowledge.empty());
}

TEST_CASE("a wrong answer forces retrieval before the next turn") {
  Scripted s;
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase tc = testutil::route_test(fm);
  const exam::OracleExam ex = route_exam();
  const std::size_t wrong = (ex.correct_index + 1) % ex.presented;
  s.provider->enqueue(answer(wrong + 1), "exam.turn");
  s.provider->enqueue(answer(ex.correct_index + 1), "exam.turn");
  const exam::ExamOutcome out =
      exam::run_exam(ex, s.gw, project_index("routeproj"), fm, tc);
  CHECK(out.verdict == exam::Verdict::passed);
  CHECK(out.iterations_used == 2);
  REQUIRE(out.trace.size() == 3);
  CHECK(out.trace[0].kind == "answer");
  CHECK_FALSE(out.trace[0].detail.at("correct").get<bool>());
  CHECK(out.trace[1].kind == "enforced_retrieval");
  CHECK(out.trace[2].kind == "answer");
  // the enforced batch delivered knowledge without an extra LLM call
  CHECK(out.knowledge.size() == 3);
  CHECK(s.gw.calls("exam.turn") == 2);
  // the second prompt carried the retrieved symbols
  const auto& seen = s.provider->requests_seen();
  CHECK(seen[1].messages[1].content.find("SYMBOL ") != std::string::npos);
}

TEST_CASE("query turns resolve inside the neighborhood") {
  Scripted s;
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase tc = testutil::route_test(fm);
  const exam::OracleExam ex = route_exam();
  s.provider->enqueue(
      "{\"queries\": [{\"kind\": \"method\", \"name\": \"matches\"}, "
      "{\"kind\": \"class\", \"name\": \"NotInProject\"}]}",
      "exam.turn");
  s.provider->enqueue(answer(ex.correct_index + 1), "exam.turn");
  const exam::ExamOutcome out =
      exam::run_exam(ex, s.gw, project_index("routeproj"), fm, tc);
  CHECK(out.verdict == exam::Verdict::passed);
  REQUIRE(out.trace.size() == 2);
  CHECK(out.trace[0].kind == "queries");
  const json& resolved = out.trace[0].detail.at("resolved");
  REQUIRE(resolved.size() >= 1);
  bool found = false;
  for (const auto& sym : resolved) {
    if (sym.get<std::string>() == "demo.Route.matches(HttpMethod,String)") {
      found = true;
    }
  }
  CHECK(found);
  REQUIRE_FALSE(out.knowledge.empty());
  CHECK(out.knowledge[0].provenance == model::Provenance::stage1_exam);
}

TEST_CASE("persistent wrong answers exhaust the iteration budget") {
  Scripted s;
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase tc = testutil::route_test(fm);
  const exam::OracleExam ex = route_exam();
  const std::size_t wrong = (ex.correct_index + 1) % ex.presented;
  s.provider->enqueue(answer(wrong + 1));
  s.provider->enqueue(answer(wrong + 1));
  const exam::ExamOutcome out =
      exam::run_exam(ex, s.gw, project_index("routeproj"), fm, tc,
                     /*max_iter=*/2);
  CHECK(out.verdict == exam::Verdict::exhausted);
  CHECK(out.iterations_used == 2);
}

TEST_CASE("the exam fails early once the neighborhood is used up") {
  Scripted s;
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase tc = testutil::route_test(fm);
  const exam::OracleExam ex = route_exam();
  const std::size_t wrong = (ex.correct_index + 1) % ex.presented;
  const int budget = 40;
  for (int i = 0; i < budget; ++i) s.provider->enqueue(answer(wrong + 1));
  const exam::ExamOutcome out = exam::run_exam(
      ex, s.gw, project_index("routeproj"), fm, tc, /*max_iter=*/budget);
  CHECK(out.verdict == exam::Verdict::failed);
  CHECK(out.iterations_used < budget);
  REQUIRE_FALSE(out.trace.empty());
  CHECK(out.trace.back().kind == "answer");
  CHECK_FALSE(out.trace.back().detail.at("correct").get<bool>());
  // every neighborhood symbol was eventually taught
  const index::Neighborhood nb =
      index::neighborhood(fm, tc, project_index("routeproj"));
  std::set<std::string> taught;
  for (const auto& k : out.knowledge) taught.insert(k.symbol);
  for (const auto& sym : nb.allowed) {
    if (project_index("routeproj").find(sym) != nullptr) {
      CHECK(taught.count(sym) == 1);
    }
  }
}

TEST_CASE("outcomes serialize and parse") {
  Scripted s;
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase tc = testutil::route_test(fm);
  const exam::OracleExam ex = route_exam();
  const std::size_t wrong = (ex.correct_index + 1) % ex.presented;
  s.provider->enqueue(answer(wrong + 1));
  s.provider->enqueue(answer(ex.correct_index + 1));
  const exam::ExamOutcome out =
      exam::run_exam(ex, s.gw, project_index("routeproj"), fm, tc);
  const exam::ExamOutcome back = exam::outcome_from_json(exam::to_json(out));
  CHECK(back.verdict == out.verdict);
  CHECK(back.iterations_used == out.iterations_used);
  CHECK(back.knowledge == out.knowledge);
  CHECK(back.trace == out.trace);
}
