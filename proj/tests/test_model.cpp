#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "helpers.hpp"
#include "tgen/error.hpp"
#include "tgen/model.hpp"
#include "tgen/serialize.hpp"

using namespace tgen;
using testutil::ArtifactGen;

TEST_CASE("symbol ids compose and decompose") {
  const std::string id = model::make_symbol_id("proj", "pkg.Type", "run(int)");
  CHECK(id == "proj/pkg.Type#run(int)");
  auto parts = model::parse_symbol_id(id);
  REQUIRE(parts.has_value());
  CHECK(parts->project == "proj");
  CHECK(parts->type == "pkg.Type");
  CHECK(parts->member == "run(int)");

  CHECK_FALSE(model::parse_symbol_id("no-separators").has_value());
  CHECK_FALSE(model::parse_symbol_id("missing#slash").has_value());
  CHECK_FALSE(model::parse_symbol_id("proj/#member").has_value());
}

TEST_CASE("vp names canonicalize") {
  CHECK(model::canonical_vp_name("Page Size") == "page_size");
  CHECK(model::canonical_vp_name("  paint-kind ") == "paint_kind");
  CHECK(model::canonical_vp_name("shape.outline") == "shape_outline");
  CHECK(model::canonical_vp_name("HTTP2 mode!") == "http2_mode");
  CHECK(model::canonical_vp_name("3rd value") == "rd_value");
  CHECK_THROWS_AS(model::canonical_vp_name("42"), Error);
  CHECK_THROWS_AS(model::canonical_vp_name("!!!"), Error);

  CHECK(model::is_canonical_vp_name("page_size"));
  CHECK_FALSE(model::is_canonical_vp_name("Page_size"));
  CHECK_FALSE(model::is_canonical_vp_name("page__size"));
  CHECK_FALSE(model::is_canonical_vp_name("page_"));
  CHECK_FALSE(model::is_canonical_vp_name(""));
}

TEST_CASE("method signature collapses to the declaration") {
  CHECK(model::method_signature("public  int\n f(int a,\n int b) { return 0; }") ==
        "public int f(int a, int b)");
  CHECK(model::method_signature("void g();") == "void g()");
}

TEST_CASE("validation rejects the documented defects") {
  ArtifactGen gen(7);

  SUBCASE("focal method skeleton must contain the signature") {
    model::FocalMethod fm = gen.focal_method();
    fm.file_skeleton = "class Unrelated {}";
    CHECK_THROWS_AS(model::validate(fm), Error);
  }
  SUBCASE("assertion site must match the source bytes") {
    model::TestCase tc = gen.test_case();
    tc.assertions.push_back({"assertTrue(x);", 0, 14});
    CHECK_THROWS_AS(model::validate(tc), Error);
  }
  SUBCASE("template step ids are contiguous") {
    model::ScenarioTemplate tmpl = testutil::demo_template();
    tmpl.steps[1].step_id = 5;
    CHECK_THROWS_AS(model::validate(tmpl), Error);
  }
  SUBCASE("template needs at least one vp") {
    model::ScenarioTemplate tmpl = testutil::demo_template();
    for (auto& s : tmpl.steps) s.vps.clear();
    CHECK_THROWS_AS(model::validate(tmpl), Error);
  }
  SUBCASE("template rejects forward dependencies") {
    model::ScenarioTemplate tmpl = testutil::demo_template();
    tmpl.steps[0].deps.push_back({"poke_count", 2});
    CHECK_THROWS_AS(model::validate(tmpl), Error);
  }
  SUBCASE("template rejects duplicate vp names") {
    model::ScenarioTemplate tmpl = testutil::demo_template();
    tmpl.steps[1].vps[0].name = "size";
    CHECK_THROWS_AS(model::validate(tmpl), Error);
  }
  SUBCASE("instance needs exactly one primary oracle, listed first") {
    model::ScenarioInstance ins = testutil::demo_instance();
    ins.oracles[1].kind = model::OracleKind::primary;
    CHECK_THROWS_AS(model::validate(ins), Error);
    ins = testutil::demo_instance();
    std::swap(ins.oracles[0], ins.oracles[1]);
    CHECK_THROWS_AS(model::validate(ins), Error);
  }
  SUBCASE("primary oracle must be implementation-deduced") {
    model::ScenarioInstance ins = testutil::demo_instance();
    ins.oracles[0].basis = model::OracleBasis::requirement_inferred;
    CHECK_THROWS_AS(model::validate(ins), Error);
  }
  SUBCASE("active oracle stays in range") {
    model::ScenarioInstance ins = testutil::demo_instance();
    ins.active_oracle = 2;
    CHECK_THROWS_AS(model::validate(ins), Error);
  }
  SUBCASE("rule prompt versions increase along lineage") {
    model::RulePrompt rp;
    rp.scaffold = "s";
    rp.version = 3;
    rp.lineage = 3;
    CHECK_THROWS_AS(model::validate(rp), Error);
  }
}

TEST_CASE("instance/template agreement") {
  const model::ScenarioTemplate tmpl = testutil::demo_template();
  model::ScenarioInstance ins = testutil::demo_instance();
  CHECK_NOTHROW(model::validate_against(ins, tmpl));

  SUBCASE("missing setting") {
    ins.settings.erase("observer");
    CHECK_THROWS_AS(model::validate_against(ins, tmpl), Error);
  }
  SUBCASE("undeclared settings key") {
    ins.settings["mystery"] = "x";
    CHECK_THROWS_AS(model::validate_against(ins, tmpl), Error);
  }
  SUBCASE("dep step out of range") {
    ins.setting_deps[0].step = 9;
    CHECK_THROWS_AS(model::validate_against(ins, tmpl), Error);
  }
}

TEST_CASE("artifact envelopes round-trip and reject mismatched tags") {
  ArtifactGen gen(11);
  const model::FocalMethod fm = gen.focal_method();
  const std::string doc = model::serialize_artifact(fm);
  CHECK(model::parse_focal_method(doc) == fm);
  CHECK_THROWS_AS(model::parse_test_case(doc), Error);

  // serialization is canonical: same value, same bytes
  CHECK(model::serialize_artifact(fm) == doc);
}

TEST_CASE("instance serialization normalizes oracle order") {
  model::ScenarioInstance ins = testutil::demo_instance();
  // construct a disordered variant without going through validate
  model::ScenarioInstance jumbled = ins;
  std::swap(jumbled.oracles[0], jumbled.oracles[1]);
  jumbled.active_oracle = 1;  // still points at the primary after the swap
  const model::ScenarioInstance fixed = model::normalize_oracle_order(jumbled);
  CHECK(fixed.oracles[0].kind == model::OracleKind::primary);
  CHECK(fixed.active_oracle == 0);
  CHECK(fixed == ins);
}

TEST_CASE("template text form renders and parses") {
  const model::ScenarioTemplate tmpl = testutil::demo_template();
  const std::string text = model::render_template_text(tmpl);
  CHECK(text.find("STEP 1: construct the subject") != std::string::npos);
  CHECK(text.find("VP size:") != std::string::npos);
  CHECK(text.find("[CANDIDATES: small | large]") != std::string::npos);
  CHECK(text.find("DEP size <- STEP 1") != std::string::npos);

  const model::ScenarioTemplate back =
      model::parse_template(text, tmpl.focal_id, tmpl.prompt_version);
  CHECK(back.steps.size() == tmpl.steps.size());
  CHECK(model::declared_vp_names(back) == model::declared_vp_names(tmpl));
  CHECK(back.steps[1].deps == tmpl.steps[1].deps);
  CHECK(back.steps[0].vps[0].candidates == tmpl.steps[0].vps[0].candidates);
}

TEST_CASE("template text parser reports defects with line numbers") {
  CHECK_THROWS_AS(model::parse_template("STEP 2: starts wrong\n  VP a: x\n"),
                  Error);
  try {
    model::parse_template("STEP 1: ok\n  VP Bad Name!: broken\n");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse_error);
    CHECK(e.line() == 2);
  }
  // dependency on a vp declared in the same step is a forward dependency
  CHECK_THROWS_AS(
      model::parse_template("STEP 1: go\n  VP a: x\n  DEP a <- STEP 1\n"),
      Error);
}

TEST_CASE("declared vp names preserve declaration order") {
  const auto names = model::declared_vp_names(testutil::demo_template());
  CHECK(names == std::vector<std::string>{"size", "poke_count", "observer"});
}

TEST_CASE("randomized artifacts round-trip through their envelopes") {
  ArtifactGen gen(1234);
  for (int i = 0; i < 50; ++i) {
    const model::FocalMethod fm = gen.focal_method();
    CHECK(model::parse_focal_method(model::serialize_artifact(fm)) == fm);
    const model::TestCase tc = gen.test_case();
    CHECK(model::parse_test_case(model::serialize_artifact(tc)) == tc);
    const model::KnowledgeItem k = gen.knowledge_item();
    CHECK(model::parse_knowledge_item(model::serialize_artifact(k)) == k);
    const model::ScenarioTemplate tmpl = gen.scenario_template();
    CHECK(model::parse_scenario_template(model::serialize_artifact(tmpl)) == tmpl);
    const model::ScenarioInstance ins = gen.scenario_instance();
    CHECK(model::parse_scenario_instance(model::serialize_artifact(ins)) == ins);
    const model::RulePrompt rp = gen.rule_prompt();
    CHECK(model::parse_rule_prompt(model::serialize_artifact(rp)) == rp);
  }
}
