#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "helpers.hpp"
#include "tgen/error.hpp"
#include "tgen/index.hpp"
#include "tgen/java_scan.hpp"
#include "tgen/workspace.hpp"

using namespace tgen;
using testutil::fixture;
using testutil::project_index;

TEST_CASE("masking preserves length and blanks strings and comments") {
  const std::string src =
      "class A { // line comment\n"
      "  String s = \"lit\\\"eral\"; /* block\n comment */ char c = 'x';\n}";
  const std::string masked = index::mask_java(src);
  REQUIRE(masked.size() == src.size());
  CHECK(masked.find("line comment") == std::string::npos);
  CHECK(masked.find("lit") == std::string::npos);
  CHECK(masked.find("block") == std::string::npos);
  CHECK(masked.find("class A") != std::string::npos);
  // newlines survive masking so line numbers stay stable
  CHECK(std::count(masked.begin(), masked.end(), '\n') ==
        std::count(src.begin(), src.end(), '\n'));
}

TEST_CASE("tinyproj indexes the box symbols and records scan warnings") {
  const auto& idx = project_index("tinyproj");
  CHECK(idx.symbols().size() == 5);
  CHECK(idx.find("demo.Box") != nullptr);
  CHECK(idx.find("demo.Box.capacity") != nullptr);          // field
  CHECK(idx.find("demo.Box.capacity()") != nullptr);        // method
  CHECK(idx.find("demo.Box.Box(int)") != nullptr);          // constructor
  CHECK(idx.find("demo.Box.fits(int)") != nullptr);
  REQUIRE(idx.warnings().size() == 1);
  CHECK(idx.warnings()[0].find("Broken.java") != std::string::npos);

  const index::IndexedSymbol* fits = idx.find("demo.Box.fits(int)");
  REQUIRE(fits != nullptr);
  CHECK(fits->kind == model::SymbolKind::method);
  CHECK(fits->owner == "demo.Box");
  CHECK(fits->simple == "fits");
  CHECK(fits->definition.find("public boolean fits(int size)") !=
        std::string::npos);
  CHECK(fits->line > 0);
  CHECK(fits->end_line >= fits->line);
}

TEST_CASE("empty project refuses to index") {
  testutil::TempDir tmp;
  try {
    index::SymbolIndex::build(tmp.path());
    FAIL("expected empty_project");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::empty_project);
  }
}

TEST_CASE("hierarchy records parents and overrides") {
  const auto& idx = project_index("hierproj");
  const auto& hier = idx.hierarchy();
  REQUIRE(hier.count("shapes.Circle") == 1);
  const auto& entry = hier.at("shapes.Circle");
  CHECK(entry.parents == std::vector<std::string>{"shapes.Base"});
  REQUIRE(hier.count("shapes.Base") == 1);
  CHECK(hier.at("shapes.Base").parents ==
        std::vector<std::string>{"shapes.Shape"});

  bool found_override = false;
  for (const auto& [method, parent_method] : entry.overridden) {
    if (method == "shapes.Circle.area()" &&
        parent_method == "shapes.Base.area()") {
      found_override = true;
    }
  }
  CHECK(found_override);
}

TEST_CASE("queries resolve by simple name, kind, and scope") {
  const auto& idx = project_index("hierproj");

  auto items = idx.query("area", index::QueryKind::method, nullptr, true,
                         model::Provenance::stage2_query);
  CHECK(items.size() >= 2);  // Shape.area and Circle.area

  items = idx.query("shapes.Circle", index::QueryKind::class_, nullptr, true,
                    model::Provenance::stage2_query);
  REQUIRE(items.size() == 1);
  CHECK(items[0].symbol == "shapes.Circle");
  CHECK(items[0].provenance == model::Provenance::stage2_query);

  // scope filtering
  std::set<std::string> scope = {"shapes.Shape.area()"};
  items = idx.query("area", index::QueryKind::method, &scope, true,
                    model::Provenance::stage1_exam);
  REQUIRE(items.size() == 1);
  CHECK(items[0].symbol == "shapes.Shape.area()");

  // required + nothing matched
  try {
    idx.query("nonexistent", index::QueryKind::any, nullptr, true,
              model::Provenance::stage2_query);
    FAIL("expected not_found");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::not_found);
  }
  CHECK(idx.query("nonexistent", index::QueryKind::any, nullptr, false,
                  model::Provenance::stage2_query)
            .empty());
}

TEST_CASE("family queries expand over the subtype family") {
  const auto& idx = project_index("hierproj");
  const auto items = idx.query("Shape", index::QueryKind::family, nullptr, true,
                               model::Provenance::stage2_query);
  std::set<std::string> names;
  for (const auto& k : items) names.insert(k.symbol);
  CHECK(names.count("shapes.Shape"));
  CHECK(names.count("shapes.Base"));
  CHECK(names.count("shapes.Circle"));
}

TEST_CASE("find_enclosing prefers members over their type") {
  const auto& idx = project_index("routeproj");
  const index::IndexedSymbol* matches = idx.find("demo.Route.matches(HttpMethod,String)");
  REQUIRE(matches != nullptr);
  const index::IndexedSymbol* hit =
      idx.find_enclosing(matches->file, matches->line + 1);
  REQUIRE(hit != nullptr);
  CHECK(hit->qualified == matches->qualified);
  CHECK(idx.find_enclosing("src/demo/Route.java", 100000) == nullptr);
  CHECK(idx.find_enclosing("not/a/file.java", 3) == nullptr);
}

TEST_CASE("index save/load round-trips") {
  testutil::TempDir tmp;
  const auto& idx = project_index("routeproj");
  const auto path = tmp.path() / "index.json";
  idx.save(path);
  const index::SymbolIndex loaded = index::SymbolIndex::load(path);
  CHECK(loaded.symbols().size() == idx.symbols().size());
  CHECK(loaded.hierarchy().size() == idx.hierarchy().size());
  CHECK(loaded.by_file().size() == idx.by_file().size());
  CHECK(loaded.to_json() == idx.to_json());
}

TEST_CASE("neighborhood covers test identifiers and focal members") {
  const auto& idx = project_index("routeproj");
  const model::FocalMethod fm = testutil::route_focal();
  const model::TestCase tc = testutil::route_test(fm);
  const index::Neighborhood hood = index::neighborhood(fm, tc, idx);
  CHECK(hood.allowed.count("demo.Route.matches(HttpMethod,String)"));
  CHECK(hood.allowed.count("demo.Route"));              // declaring type
  CHECK(hood.allowed.count("demo.Route.matchPath(String)"));  // member closure
  CHECK(hood.allowed.count("demo.HttpMethod"));         // referenced in test
  CHECK(hood.allowed.count("demo.HttpMethod.GET"));
}

TEST_CASE("workspace selects focal and test artifacts") {
  const auto& idx = project_index("routeproj");
  const model::FocalMethod fm = testutil::route_focal();
  CHECK(fm.id == "routeproj/demo.Route#matches(HttpMethod,String)");
  CHECK(fm.source.find("public boolean matches(") != std::string::npos);
  CHECK(fm.file_skeleton.find("class Route") != std::string::npos);
  CHECK(fm.project == "routeproj");

  const model::TestCase tc = testutil::route_test(fm);
  CHECK(tc.id == "routeproj/demo.RouteTest#matchesParamRoute()");
  CHECK(tc.name == "matchesParamRoute");
  CHECK(tc.focal_id == fm.id);
  REQUIRE(tc.assertions.size() == 2);
  CHECK(tc.assertions[0].statement.rfind("assertTrue(", 0) == 0);
  CHECK(tc.assertions[1].statement.rfind("assertFalse(", 0) == 0);
  // positions index into the method source
  for (const auto& site : tc.assertions) {
    CHECK(tc.source.compare(site.offset, site.length, site.statement) == 0);
  }

  try {
    workspace::select_focal(idx, "noSuchMethod", "routeproj");
    FAIL("expected not_found");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::not_found);
  }
}

TEST_CASE("assertion extraction handles qualified calls and ignores strings") {
  const std::string src =
      "public void t() {\n"
      "  helper(\"assertTrue(fake);\");\n"
      "  Assertions.assertEquals(1,\n      two());\n"
      "  org.junit.Assert.assertNotNull(x); // assertFalse in comment\n"
      "  verify(counter.incremented());\n"
      "  verify(mock).poke();\n"
      "  fail(\"boom\");\n"
      "}\n";
  const auto sites = workspace::extract_assertions(src);
  REQUIRE(sites.size() == 4);
  CHECK(sites[0].statement.rfind("Assertions.assertEquals(1,", 0) == 0);
  CHECK(sites[1].statement == "org.junit.Assert.assertNotNull(x);");
  CHECK(sites[2].statement == "verify(counter.incremented());");
  // verify(mock).poke(); is a fluent chain, not an assertion statement
  CHECK(sites[3].statement == "fail(\"boom\");");
  for (const auto& s : sites) {
    CHECK(src.compare(s.offset, s.length, s.statement) == 0);
  }
}

TEST_CASE("assertion-free sources yield no sites") {
  CHECK(workspace::extract_assertions("public void t() { poke(); }").empty());
  const model::FocalMethod fm = testutil::paint_focal();
  const model::TestCase tc = testutil::paint_test(fm);
  CHECK(tc.assertions.empty());
}

TEST_CASE("file skeleton outlines every top-level type in the file") {
  const auto& idx = project_index("routeproj");
  const index::IndexedSymbol* matches =
      idx.find("demo.Route.matches(HttpMethod,String)");
  REQUIRE(matches != nullptr);
  const std::string skel = workspace::file_skeleton(idx, *matches);
  CHECK(skel.find("class Route") != std::string::npos);
  CHECK(skel.find("matches(HttpMethod method, String path)") !=
        std::string::npos);
  CHECK(skel.find("{ ... }") != std::string::npos);
}
