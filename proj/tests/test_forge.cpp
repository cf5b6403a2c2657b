#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <memory>
#include <string>

#include "helpers.hpp"
#include "tgen/error.hpp"
#include "tgen/forge.hpp"
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

model::ScenarioInstance route_instance() {
  model::ScenarioInstance ins = testutil::demo_instance();
  ins.oracles = {
      {model::OracleKind::primary,
       "assertTrue(route.matches(HttpMethod.GET, \"/users/7/posts\"));",
       model::OracleBasis::implementation_deduced},
      {model::OracleKind::alternative,
       "assertTrue(route.matches(HttpMethod.GET, \"/users/9/posts\"));",
       model::OracleBasis::requirement_inferred}};
  ins.active_oracle = 0;
  return ins;
}

model::TestCase gen_test(const model::FocalMethod& fm, const std::string& name,
                         const std::string& statements) {
  model::TestCase t;
  t.id = "routeproj/demo.RouteTest#" + name + "()";
  t.name = name;
  t.focal_id = fm.id;
  t.source = "public void " + name + "() {\n" + statements + "}\n";
  t.origin = model::TestOrigin::generated;
  return t;
}

const char* kGoodBody =
    "    Route route = new Route(HttpMethod.GET, \"/users/{id}/posts\");\n"
    "    assertTrue(route.matches(HttpMethod.GET, \"/users/7/posts\"));\n";

const char* kFixReply =
    "Here is the corrected test:\n"
    "```java\n"
    "public void candidate() {\n"
    "    Route route = new Route(HttpMethod.GET, \"/users/{id}/posts\");\n"
    "    assertTrue(route.matches(HttpMethod.GET, \"/users/7/posts\"));\n"
    "}\n"
    "```\n";

}  // namespace

TEST_CASE("test names chain the focal name with camelized settings") {
  const model::FocalMethod fm = testutil::route_focal();

  SUBCASE("settings render in map order") {
    // observer=peek, poke_count=3, size=small
    CHECK(forge::derive_test_name(fm, testutil::demo_instance()) ==
          "matchesPeek3Small");
  }
  SUBCASE("no usable settings falls back to a scenario suffix") {
    model::ScenarioInstance ins = testutil::demo_instance();
    ins.settings = {{"alpha", ""}};
    CHECK(forge::derive_test_name(fm, ins) == "matchesScenario");
  }
  SUBCASE("the cap keeps names bounded") {
    model::ScenarioInstance ins = testutil::demo_instance();
    ins.settings = {{"alpha", std::string(100, 'x')}};
    CHECK(forge::derive_test_name(fm, ins) == "matchesScenario");
  }
  SUBCASE("punctuation starts new camel words") {
    model::ScenarioInstance ins = testutil::demo_instance();
    ins.settings = {{"kind", "radial gradient"}};
    CHECK(forge::derive_test_name(fm, ins) == "matchesRadialGradient");
  }
}

TEST_CASE("generation renames the method and stamps identity") {
  Scripted s;
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase tc = testutil::route_test(fm);
  s.provider->enqueue(kFixReply, "forge.generate");

  const model::TestCase out =
      forge::generate_test(testutil::demo_instance(), fm, tc, {}, s.gw);
  CHECK(out.name == "matchesPeek3Small");
  CHECK(out.source.find("void matchesPeek3Small(") != std::string::npos);
  CHECK(out.source.find("candidate") == std::string::npos);
  CHECK(out.id == "routeproj/demo.RouteTest#matchesPeek3Small()");
  CHECK(out.focal_id == fm.id);
  CHECK(out.origin == model::TestOrigin::generated);
  // the prompt carried the plan and the active oracle
  const std::string& prompt = s.provider->requests_seen()[0].messages[1].content;
  CHECK(prompt.find(testutil::demo_instance().narrative) != std::string::npos);
  CHECK(prompt.find("assertEquals(3, thing.peek());") != std::string::npos);
}

TEST_CASE("generation rejects a response without exactly one method") {
  Scripted s;
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase tc = testutil::route_test(fm);
  const char* two_methods =
      "```java\nvoid a() {}\nvoid b() {}\n```";
  s.provider->enqueue(two_methods);
  s.provider->enqueue(two_methods);  // the corrective retry fares no better
  try {
    forge::generate_test(testutil::demo_instance(), fm, tc, {}, s.gw);
    FAIL("expected malformed_output");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::malformed_output);
  }
  CHECK(s.gw.calls("forge.generate") == 2);
}

TEST_CASE("error elements come from diagnostics and topmost frames") {
  SUBCASE("unresolved-symbol diagnostic") {
    const auto elements = forge::extract_error_elements(
        "{scratch}/test/demo/RouteTest.java:3: error: cannot find symbol\n"
        "  symbol:   method matchez\n"
        "  location: class RouteTest\n");
    REQUIRE(elements.size() == 1);
    CHECK(elements[0].name == "matchez");
    CHECK(elements[0].file == "{scratch}/test/demo/RouteTest.java");
    CHECK(elements[0].line == 3);
  }
  SUBCASE("one element per stack-trace block, topmost frame") {
    const auto elements = forge::extract_error_elements(
        "Exception in thread \"main\" java.lang.NullPointerException: x\n"
        "\tat demo.Route.matches(Route.java:18)\n"
        "\tat demo.RouteTest.genNull(RouteTest.java:3)\n"
        "\n"
        "Exception in thread \"main\" java.lang.IllegalStateException: y\n"
        "\tat demo.Other.thing(Other.java:4)\n"
        "\tat demo.RouteTest.genNull(RouteTest.java:5)\n");
    REQUIRE(elements.size() == 2);
    CHECK(elements[0] == forge::ErrorElement{"matches", "Route.java", 18});
    CHECK(elements[1] == forge::ErrorElement{"thing", "Other.java", 4});
  }
  SUBCASE("repeated elements collapse") {
    const auto elements = forge::extract_error_elements(
        "A.java:7: error: cannot find symbol\n  symbol: variable ghost\n"
        "A.java:7: error: cannot find symbol\n  symbol: variable ghost\n");
    CHECK(elements.size() == 1);
  }
  SUBCASE("assertion detail lines alone carry no elements") {
    CHECK(forge::extract_error_elements("expected: <3> but was: <4>\n").empty());
  }
}

TEST_CASE("a test that already passes needs no model calls") {
  Scripted s;
  testutil::TempDir tmp;
  runner::Runner run(testutil::project_config("routeproj"),
                     &project_index("routeproj"), 2, tmp.path());
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase test = gen_test(fm, "genHappy", kGoodBody);

  const forge::RepairRecord record = forge::repair(
      test, route_instance(), fm, run, project_index("routeproj"), s.gw);
  CHECK(record.final_status == forge::FinalStatus::passing);
  CHECK(record.iterations == 1);
  REQUIRE(record.attempts.size() == 1);
  CHECK(record.attempts[0].outcome == runner::RunStatus::pass);
  CHECK(s.gw.total_calls() == 0);
  CHECK(record.policy_note.empty());
}

TEST_CASE("a compile error is repaired with one rewrite") {
  Scripted s;
  testutil::TempDir tmp;
  runner::Runner run(testutil::project_config("routeproj"),
                     &project_index("routeproj"), 2, tmp.path());
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase test = gen_test(
      fm, "genBroken",
      "    Route route = new Route(HttpMethod.GET, \"/users/{id}/posts\");\n"
      "    assertTrue(route.matchez(HttpMethod.GET, \"/users/7/posts\"));\n");
  s.provider->enqueue(kFixReply, "forge.repair");

  const forge::RepairRecord record = forge::repair(
      test, route_instance(), fm, run, project_index("routeproj"), s.gw);
  CHECK(record.final_status == forge::FinalStatus::passing);
  CHECK(record.iterations == 2);
  REQUIRE(record.attempts.size() == 2);
  CHECK(record.attempts[0].outcome == runner::RunStatus::compile_error);
  REQUIRE(!record.attempts[0].elements.empty());
  CHECK(record.attempts[0].elements[0].name == "matchez");
  CHECK(record.attempts[1].outcome == runner::RunStatus::pass);
  // the repaired source keeps the original method name
  CHECK(record.attempts[1].test_source.find("void genBroken(") !=
        std::string::npos);
  const std::string& prompt = s.provider->requests_seen()[0].messages[1].content;
  CHECK(prompt.find("Failure class: compile_error") != std::string::npos);
}

TEST_CASE("frame positions resolve to project knowledge") {
  Scripted s;
  testutil::TempDir tmp;
  runner::Runner run(testutil::project_config("routeproj"),
                     &project_index("routeproj"), 2, tmp.path());
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase test = gen_test(
      fm, "genNull",
      "    Route route = new Route(HttpMethod.GET, \"/users/{id}/posts\");\n"
      "    assertTrue(route.matches(null, \"/users/7/posts\"));\n");
  s.provider->enqueue(kFixReply);

  const forge::RepairRecord record = forge::repair(
      test, route_instance(), fm, run, project_index("routeproj"), s.gw);
  CHECK(record.final_status == forge::FinalStatus::passing);
  REQUIRE(record.attempts.size() == 2);
  CHECK(record.attempts[0].outcome == runner::RunStatus::execution_error);
  REQUIRE(!record.attempts[0].elements.empty());
  CHECK(record.attempts[0].elements[0].name == "matches");
  REQUIRE(!record.attempts[0].knowledge.empty());
  CHECK(record.attempts[0].knowledge[0].symbol ==
        "demo.Route.matches(HttpMethod,String)");
  CHECK(record.attempts[0].knowledge[0].provenance ==
        model::Provenance::stage3_error);

  const json doc = forge::to_json(record);
  CHECK(doc.at("final_status").get<std::string>() == "passing");
  CHECK(doc.at("attempts").size() == 2);
}

TEST_CASE("a failing alternative oracle escalates instead of repairing") {
  Scripted s;
  testutil::TempDir tmp;
  runner::Runner run(testutil::project_config("routeproj"),
                     &project_index("routeproj"), 2, tmp.path());
  const model::FocalMethod fm = testutil::route_focal();
  model::ScenarioInstance ins = route_instance();
  ins.active_oracle = 1;
  const model::TestCase test = gen_test(
      fm, "genAlt",
      "    Route route = new Route(HttpMethod.GET, \"/users/{id}/posts\");\n"
      "    assertFalse(route.matches(HttpMethod.GET, \"/users/7/posts\"));\n");

  const forge::RepairRecord record =
      forge::repair(test, ins, fm, run, project_index("routeproj"), s.gw);
  CHECK(record.final_status == forge::FinalStatus::failing_after_max);
  CHECK(record.iterations == 1);
  REQUIRE(record.attempts.size() == 1);
  CHECK(record.attempts[0].outcome == runner::RunStatus::assertion_failure);
  CHECK(record.policy_note.find("escalated to the developer") !=
        std::string::npos);
  CHECK(s.gw.total_calls() == 0);
}

TEST_CASE("a failing primary oracle is locked while the setup is repaired") {
  Scripted s;
  testutil::TempDir tmp;
  runner::Runner run(testutil::project_config("routeproj"),
                     &project_index("routeproj"), 2, tmp.path());
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase test = gen_test(
      fm, "genWrongSetup",
      "    Route route = new Route(HttpMethod.POST, \"/users/{id}/posts\");\n"
      "    assertTrue(route.matches(HttpMethod.GET, \"/users/7/posts\"));\n");
  s.provider->enqueue(kFixReply);

  const forge::RepairRecord record = forge::repair(
      test, route_instance(), fm, run, project_index("routeproj"), s.gw);
  CHECK(record.final_status == forge::FinalStatus::passing);
  CHECK(record.policy_note.find("primary oracle locked") != std::string::npos);
  const std::string& prompt = s.provider->requests_seen()[0].messages[1].content;
  CHECK(prompt.find("locked: keep it as is") != std::string::npos);
}

TEST_CASE("an identical resubmission aborts the loop") {
  Scripted s;
  testutil::TempDir tmp;
  runner::Runner run(testutil::project_config("routeproj"),
                     &project_index("routeproj"), 2, tmp.path());
  const model::FocalMethod fm = testutil::route_focal();
  const std::string body =
      "    Route route = new Route(HttpMethod.GET, \"/users/{id}/posts\");\n"
      "    assertTrue(route.matchez(HttpMethod.GET, \"/users/7/posts\"));\n";
  const model::TestCase test = gen_test(fm, "genStuck", body);
  // same statements, different whitespace and method name
  s.provider->enqueue("```java\npublic  void  anything() {\n" + body +
                      "}\n```");

  const forge::RepairRecord record = forge::repair(
      test, route_instance(), fm, run, project_index("routeproj"), s.gw);
  CHECK(record.final_status == forge::FinalStatus::failing_after_max);
  CHECK(record.iterations == 1);
  CHECK(record.policy_note.find("identical resubmission") != std::string::npos);
}

TEST_CASE("the iteration budget caps repair attempts") {
  Scripted s;
  testutil::TempDir tmp;
  runner::Runner run(testutil::project_config("routeproj"),
                     &project_index("routeproj"), 2, tmp.path());
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase test = gen_test(
      fm, "genHopeless",
      "    Route route = new Route(HttpMethod.GET, \"/users/{id}/posts\");\n"
      "    assertTrue(route.matchez(HttpMethod.GET, \"/users/7/posts\"));\n");
  s.provider->enqueue(
      "```java\nvoid next() {\n"
      "    Route route = new Route(HttpMethod.GET, \"/users/{id}/posts\");\n"
      "    assertFalse(route.matchez(HttpMethod.POST, \"/users/7/posts\"));\n"
      "}\n```");

  const forge::RepairRecord record =
      forge::repair(test, route_instance(), fm, run,
                    project_index("routeproj"), s.gw, /*max_iter=*/2);
  CHECK(record.final_status == forge::FinalStatus::failing_after_max);
  CHECK(record.iterations == 2);
  REQUIRE(record.attempts.size() == 2);
  CHECK(record.attempts[1].outcome == runner::RunStatus::compile_error);
  CHECK(s.gw.calls("forge.repair") == 1);  // no rewrite after the last run
}
