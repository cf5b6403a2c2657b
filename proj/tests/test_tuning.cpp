#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "tgen/error.hpp"
#include "tgen/gateway.hpp"
#include "tgen/providers.hpp"
#include "tgen/tuning.hpp"

using namespace tgen;

namespace {

tuning::TuningSample sample_n(int n) {
  tuning::TuningSample s;
  s.fm = testutil::route_focal();
  s.tc = testutil::route_test(s.fm);
  s.truth = testutil::demo_template();
  s.truth.steps[0].action = "act " + std::to_string(n);
  return s;
}

std::vector<tuning::TuningSample> dataset_n(int n) {
  std::vector<tuning::TuningSample> out;
  for (int i = 0; i < n; ++i) out.push_back(sample_n(i));
  return out;
}

model::ScenarioTemplate tmpl_with(const std::vector<std::string>& vps) {
  model::ScenarioTemplate tmpl;
  tmpl.focal_id = "p/T#m()";
  model::TemplateStep step;
  step.step_id = 1;
  step.action = "do the thing";
  for (const std::string& name : vps) {
    step.vps.push_back({name, "a factor", {}, model::VpKind::abstract_choice});
  }
  tmpl.steps.push_back(step);
  return tmpl;
}

std::vector<std::string> actions(const std::vector<tuning::TuningSample>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) out.push_back(s.truth.steps[0].action);
  return out;
}

// One generated template per call: half right, half noise against the
// demo_template truth {size, poke_count, observer}.
const char* kGeneratedReply =
    "Analysis of the test.\n"
    "TEMPLATE:\n"
    "STEP 1: exercise the subject\n"
    "  VP size: how large it starts [CANDIDATES: small | large]\n"
    "  VP haziness: a spurious factor\n";

llm::Gateway stub_gateway(std::shared_ptr<llm::Provider> p) {
  return llm::Gateway(std::move(p));
}

}  // namespace

TEST_CASE("samples check that the test targets the focal method") {
  tuning::TuningSample s = sample_n(0);
  CHECK_NOTHROW(tuning::validate(s));
  s.tc.focal_id = "other/T#m()";
  CHECK_THROWS_AS(tuning::validate(s), Error);
}

TEST_CASE("samples round-trip through their document form") {
  const tuning::TuningSample s = sample_n(3);
  const std::string text = tuning::serialize_sample(s);
  const tuning::TuningSample back = tuning::parse_sample(text);
  CHECK(tuning::serialize_sample(back) == text);
  CHECK(back.truth.steps[0].action == "act 3");
}

TEST_CASE("datasets load sorted by file name, ignoring other files") {
  testutil::TempDir dir;
  const auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir.path() / name);
    out << body;
  };
  write("c.sample.json", tuning::serialize_sample(sample_n(2)));
  write("a.sample.json", tuning::serialize_sample(sample_n(0)));
  write("b.sample.json", tuning::serialize_sample(sample_n(1)));
  write("notes.txt", "not a sample");
  write("x.json", "{}");

  const auto loaded = tuning::load_dataset(dir.path());
  CHECK(actions(loaded) == std::vector<std::string>{"act 0", "act 1", "act 2"});

  try {
    tuning::load_dataset(dir.path() / "missing");
    FAIL("expected io_error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io_error);
  }
}

TEST_CASE("random splits are seeded and keep both sides non-empty") {
  const auto dataset = dataset_n(10);
  tuning::TuningConfig config;
  config.seed = 7;
  config.test_fraction = 0.2;

  const tuning::Split a = tuning::split_dataset(dataset, config);
  CHECK(a.test.size() == 2);
  CHECK(a.train.size() == 8);
  const tuning::Split b = tuning::split_dataset(dataset, config);
  CHECK(actions(a.train) == actions(b.train));
  CHECK(actions(a.test) == actions(b.test));

  SUBCASE("a zero fraction still holds out one sample") {
    config.test_fraction = 0.0;
    CHECK(tuning::split_dataset(dataset, config).test.size() == 1);
  }
  SUBCASE("a full fraction still trains on one sample") {
    config.test_fraction = 1.0;
    CHECK(tuning::split_dataset(dataset, config).train.size() == 1);
  }
  SUBCASE("a single sample goes entirely to training") {
    CHECK(tuning::split_dataset(dataset_n(1), config).train.size() == 1);
  }
}

TEST_CASE("leave-one-project-out splits on the focal project") {
  auto dataset = dataset_n(6);
  for (int i = 0; i < 3; ++i) dataset[i].fm.project = "held";
  tuning::TuningConfig config;
  config.split_mode = tuning::SplitMode::leave_one_project_out;
  config.holdout_project = "held";

  const tuning::Split split = tuning::split_dataset(dataset, config);
  CHECK(split.test.size() == 3);
  CHECK(split.train.size() == 3);
  for (const auto& s : split.test) CHECK(s.fm.project == "held");

  config.holdout_project = "routeproj";  // everything else
  try {
    tuning::split_dataset(dataset, config);
    FAIL("expected empty_train_split");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::empty_train_split);
  }
}

TEST_CASE("offline variation-point scoring matches on canonical names") {
  const auto truth = tmpl_with({"a", "d"});

  SUBCASE("partial overlap") {
    const tuning::VpScore s = tuning::evaluate_vp(tmpl_with({"a", "b", "c"}), truth);
    CHECK(s.precision == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(s.recall == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s.f1 == doctest::Approx(0.4).epsilon(1e-12));
  }
  SUBCASE("identity") {
    const tuning::VpScore s = tuning::evaluate_vp(truth, truth);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
    CHECK(s.f1 == 1.0);
  }
  SUBCASE("no predictions scores zero without dividing by zero") {
    const tuning::VpScore s = tuning::evaluate_vp(tmpl_with({}), truth);
    CHECK(s.precision == 0.0);
    CHECK(s.recall == 0.0);
    CHECK(s.f1 == 0.0);
  }
}

TEST_CASE("judged scoring keeps pairs injective and ignores unknown names") {
  auto provider = std::make_shared<llm::ScriptedProvider>();
  provider->enqueue(
      "[{\"predicted\": \"alpha\", \"truth\": \"a\"},"
      " {\"predicted\": \"alpha\", \"truth\": \"b\"},"
      " {\"predicted\": \"ghost\", \"truth\": \"b\"},"
      " {\"predicted\": \"beta\", \"truth\": \"a\"}]",
      "tuning.vp_judge");
  llm::Gateway gw(provider);
  const tuning::VpScore s = tuning::evaluate_vp_judged(
      tmpl_with({"alpha", "beta"}), tmpl_with({"a", "b"}), gw);
  // only (alpha, a) survives: alpha reused, ghost unknown, a reused
  CHECK(s.precision == doctest::Approx(0.5));
  CHECK(s.recall == doctest::Approx(0.5));
  CHECK(s.f1 == doctest::Approx(0.5));
}

TEST_CASE("directives edit the rule list in order and bump the version") {
  model::RulePrompt current;
  current.scaffold = "{FOCAL_METHOD} {RULES}";
  current.rules = {"r0", "r1", "r2"};
  current.version = 6;
  current.lineage = 5;

  const json directives = json::array({
      {{"op", "add"}, {"text", "r3"}},
      {{"op", "modify"}, {"index", 1}, {"text", "r1 revised"}},
      {{"op", "delete"}, {"index", 0}},
      {{"op", "modify"}, {"index", 99}, {"text", "nope"}},
  });
  std::vector<std::string> log;
  const model::RulePrompt next =
      tuning::apply_directives(current, directives, &log);
  CHECK(next.rules == std::vector<std::string>{"r1 revised", "r2", "r3"});
  CHECK(next.version == 7);
  CHECK(next.lineage == 6);
  REQUIRE(log.size() == 1);
  CHECK(log[0].find("out of range") != std::string::npos);
  CHECK(current.rules.size() == 3);  // input untouched
}

TEST_CASE("the tuning loop keeps the update cadence and picks a checkpoint") {
  auto stub = std::make_shared<llm::StubProvider>(
      [](const llm::CompletionRequest& req) -> std::string {
        if (req.tag == "tuning.generate") return kGeneratedReply;
        if (req.tag == "tuning.feedback") return "tighten the count factors";
        if (req.tag == "tuning.update") {
          return "[{\"op\": \"add\", \"text\": \"prefer counts\", "
                 "\"generalized\": false}]";
        }
        return "unexpected tag: " + req.tag;
      });
  llm::Gateway gw = stub_gateway(stub);

  tuning::TuningConfig config;
  config.epochs = 2;
  config.batch_size = 3;
  config.seed = 1;
  config.test_fraction = 0.3;  // 7 samples -> 2 test, 5 train

  const tuning::TuningRun run = tuning::tune(dataset_n(7), gw, config);

  // 2 epochs x ceil(5/3) batches -> 4 updates
  CHECK(run.update_calls == 4);
  CHECK(gw.calls("tuning.update") == 4);
  // one generation per train sample per epoch, plus checkpoint evaluation
  CHECK(gw.calls("tuning.generate") == 5 * 2 + 2 * 2);
  CHECK(gw.calls("tuning.feedback") == 10);

  REQUIRE(run.checkpoints.size() == 2);
  CHECK(run.checkpoints[0].version == 2);
  CHECK(run.checkpoints[0].rules.size() == 2);
  CHECK(run.checkpoints[1].version == 4);
  CHECK(run.checkpoints[1].rules.size() == 4);

  REQUIRE(run.metrics.size() == 2);
  for (const auto& m : run.metrics) {
    CHECK(m.precision == doctest::Approx(0.5));
    CHECK(m.recall == doctest::Approx(1.0 / 3.0));
    CHECK(m.f1 == doctest::Approx(0.4));
    CHECK(m.failed_samples == 0);
  }
  CHECK(run.selected == 0);  // equal scores tie to the earliest epoch

  const json doc = tuning::to_json(run);
  CHECK(doc.at("update_calls").get<int>() == 4);
  CHECK(doc.at("selected").get<std::size_t>() == 0);
  CHECK(doc.at("checkpoints").size() == 2);
  CHECK(doc.at("config").at("split_mode").get<std::string>() == "random_split");
}

TEST_CASE("samples that query instead of answering count as failures") {
  auto stub = std::make_shared<llm::StubProvider>(
      [](const llm::CompletionRequest& req) -> std::string {
        if (req.tag == "tuning.generate") return "QUERIES:\n- method peek\n";
        if (req.tag == "tuning.update") return "[]";
        return "unused";
      });
  llm::Gateway gw = stub_gateway(stub);

  tuning::TuningConfig config;
  config.epochs = 1;
  config.batch_size = 2;
  config.seed = 3;
  config.test_fraction = 0.25;  // 4 samples -> 1 test, 3 train

  const tuning::TuningRun run = tuning::tune(dataset_n(4), gw, config);
  CHECK(gw.calls("tuning.feedback") == 0);
  CHECK(run.update_calls == 2);  // cadence survives all-failed batches
  REQUIRE(run.metrics.size() == 1);
  CHECK(run.metrics[0].failed_samples == 1);
  CHECK(run.metrics[0].f1 == 0.0);
  bool logged = false;
  for (const auto& line : run.log) {
    if (line.find("queried instead") != std::string::npos) logged = true;
  }
  CHECK(logged);
}

TEST_CASE("degenerate tuning configurations are rejected") {
  auto stub = std::make_shared<llm::StubProvider>(
      [](const llm::CompletionRequest&) { return std::string("x"); });
  llm::Gateway gw = stub_gateway(stub);
  tuning::TuningConfig config;
  config.epochs = 0;
  try {
    tuning::tune(dataset_n(3), gw, config);
    FAIL("expected config_error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config_error);
  }
}
