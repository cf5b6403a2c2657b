#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tgen/index.hpp"
#include "tgen/model.hpp"
#include "tgen/runner.hpp"
#include "tgen/workspace.hpp"

namespace testutil {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(TGEN_FIXTURE_DIR) / name;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<std::uint64_t> counter{0};
    const auto stamp = std::to_string(
        std::chrono::steady_clock::now().time_since_epoch().count() % 100000);
    path_ = std::filesystem::temp_directory_path() /
            ("tgen-test-" + stamp + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline const tgen::index::SymbolIndex& project_index(const std::string& name) {
  static std::map<std::string, tgen::index::SymbolIndex> cache;
  auto it = cache.find(name);
  if (it == cache.end()) {
    it = cache.emplace(name, tgen::index::SymbolIndex::build(fixture(name)))
             .first;
  }
  return it->second;
}

inline tgen::runner::ProjectConfig project_config(const std::string& name) {
  return tgen::runner::load_project_config(fixture(name) / "project.json");
}

inline tgen::model::FocalMethod route_focal() {
  return tgen::workspace::select_focal(project_index("routeproj"), "matches",
                                       "routeproj");
}

inline tgen::model::TestCase route_test(const tgen::model::FocalMethod& fm) {
  return tgen::workspace::select_test(project_index("routeproj"),
                                      "matchesParamRoute", "routeproj", fm.id);
}

inline tgen::model::FocalMethod paint_focal() {
  return tgen::workspace::select_focal(project_index("paintproj"), "setPaint",
                                       "paintproj");
}

inline tgen::model::TestCase paint_test(const tgen::model::FocalMethod& fm) {
  return tgen::workspace::select_test(project_index("paintproj"),
                                      "linearGradientPaint", "paintproj",
                                      fm.id);
}

// A small hand-built template: two steps, three VPs, one dependency.
inline tgen::model::ScenarioTemplate demo_template() {
  namespace m = tgen::model;
  m::ScenarioTemplate tmpl;
  tmpl.focal_id = "demo/pkg.Thing#poke(int)";
  tmpl.prompt_version = "v1";
  m::TemplateStep s1;
  s1.step_id = 1;
  s1.action = "construct the subject";
  s1.vps.push_back({"size", "how large the subject starts", {"small", "large"},
                    m::VpKind::abstract_choice});
  m::TemplateStep s2;
  s2.step_id = 2;
  s2.action = "poke it and observe";
  s2.vps.push_back({"poke_count", "number of pokes", {"1", "3"},
                    m::VpKind::abstract_choice});
  s2.vps.push_back({"observer", "which accessor checks the result", {},
                    m::VpKind::code_element});
  s2.deps.push_back({"size", 1});
  tmpl.steps = {s1, s2};
  return tmpl;
}

inline tgen::model::ScenarioInstance demo_instance() {
  namespace m = tgen::model;
  m::ScenarioInstance ins;
  ins.template_ref = "tpl-0001";
  ins.settings = {{"size", "small"}, {"poke_count", "3"}, {"observer", "peek"}};
  ins.setting_deps = {{"size", 1, "small"}};
  ins.oracles = {
      {m::OracleKind::primary, "assertEquals(3, thing.peek());",
       m::OracleBasis::implementation_deduced},
      {m::OracleKind::alternative, "assertTrue(thing.peek() > 0);",
       m::OracleBasis::requirement_inferred}};
  ins.narrative = "construct the subject with size=small\npoke it and observe "
                  "with poke_count=3, observer=peek";
  ins.active_oracle = 0;
  return ins;
}

// ---- randomized-but-valid artifact generators (round-trip property tests) --

class ArtifactGen {
 public:
  explicit ArtifactGen(std::uint64_t seed) : rng_(seed) {}

  tgen::model::FocalMethod focal_method() {
    namespace m = tgen::model;
    m::FocalMethod fm;
    const std::string type = type_name();
    const std::string member = ident() + "(" + (flip() ? "int" : "") + ")";
    fm.id = m::make_symbol_id(ident(), "pkg." + type, member);
    fm.source = "public " + (flip() ? std::string("int") : std::string("void")) +
                " " + ident() + "(" + (flip() ? "int x" : "") + ") {\n  " +
                text_line() + "\n}";
    fm.file_skeleton = "class " + type + " {\n  " +
                       m::method_signature(fm.source) + " { ... }\n}";
    fm.project = ident();
    fm.commit = flip() ? hex_string(8) : "";
    return fm;
  }

  tgen::model::TestCase test_case() {
    namespace m = tgen::model;
    m::TestCase tc;
    tc.id = m::make_symbol_id(ident(), "pkg." + type_name(), ident() + "()");
    tc.name = ident();
    tc.focal_id = m::make_symbol_id(ident(), "pkg." + type_name(), ident() + "()");
    std::string src = "public void " + tc.name + "() {\n";
    const int sites = pick(0, 3);
    for (int i = 0; i < sites; ++i) {
      src += "    " + text_line() + ";\n";
      const std::string stmt =
          "assertEquals(" + std::to_string(pick(0, 99)) + ", it.get());";
      m::AssertionSite site;
      site.statement = stmt;
      site.offset = src.size() + 4;
      site.length = stmt.size();
      src += "    " + stmt + "\n";
      tc.assertions.push_back(site);
    }
    src += "}\n";
    tc.source = src;
    tc.origin = static_cast<m::TestOrigin>(pick(0, 2));
    return tc;
  }

  tgen::model::KnowledgeItem knowledge_item() {
    namespace m = tgen::model;
    m::KnowledgeItem k;
    k.kind = static_cast<m::SymbolKind>(pick(0, 3));
    k.symbol = "pkg." + type_name() +
               (k.kind == m::SymbolKind::class_ ? "" : "." + ident());
    k.definition = k.kind == m::SymbolKind::field && flip()
                       ? std::string()
                       : "public " + text_line();
    const int usages = pick(0, 3);
    for (int i = 0; i < usages; ++i) {
      k.usages.push_back({"src/" + type_name() + ".java",
                          static_cast<std::size_t>(pick(1, 400))});
    }
    k.provenance = static_cast<m::Provenance>(pick(0, 2));
    return k;
  }

  tgen::model::ScenarioTemplate scenario_template() {
    namespace m = tgen::model;
    m::ScenarioTemplate tmpl;
    tmpl.focal_id = m::make_symbol_id(ident(), "pkg." + type_name(), ident() + "()");
    tmpl.prompt_version = "v" + std::to_string(pick(0, 9));
    const int steps = pick(1, 4);
    std::vector<std::string> declared;
    for (int s = 1; s <= steps; ++s) {
      m::TemplateStep step;
      step.step_id = s;
      step.action = text_line();
      const int vps = s == 1 ? pick(1, 2) : pick(0, 2);
      for (int v = 0; v < vps; ++v) {
        m::VariationPoint vp;
        vp.name = vp_name(declared.size());
        vp.description = text_line();
        const int cands = pick(0, 3);
        for (int c = 0; c < cands; ++c) vp.candidates.push_back(word());
        vp.kind = static_cast<m::VpKind>(pick(0, 1));
        declared.push_back(vp.name);
        step.vps.push_back(vp);
      }
      // dependencies point at VPs declared in strictly earlier steps
      if (s > 1 && !tmpl.steps.empty() && flip()) {
        for (int t = 0; t < s - 1; ++t) {
          const m::TemplateStep& earlier = tmpl.steps[static_cast<std::size_t>(t)];
          if (!earlier.vps.empty()) {
            step.deps.push_back({earlier.vps.front().name, earlier.step_id});
            break;
          }
        }
      }
      tmpl.steps.push_back(step);
    }
    return tmpl;
  }

  tgen::model::ScenarioInstance scenario_instance() {
    namespace m = tgen::model;
    m::ScenarioInstance ins;
    ins.template_ref = hex_string(16);
    const int settings = pick(1, 4);
    for (int i = 0; i < settings; ++i) {
      ins.settings["vp_" + std::string(1, static_cast<char>('a' + i))] = word();
    }
    if (flip()) {
      ins.setting_deps.push_back({ins.settings.begin()->first, 1,
                                  ins.settings.begin()->second});
    }
    ins.oracles.push_back({m::OracleKind::primary,
                           "assertEquals(" + word() + ", probe());",
                           m::OracleBasis::implementation_deduced});
    const int alts = pick(0, 2);
    for (int i = 0; i < alts; ++i) {
      ins.oracles.push_back({m::OracleKind::alternative,
                             "assertTrue(" + word() + ");",
                             static_cast<m::OracleBasis>(pick(0, 1))});
    }
    ins.narrative = text_line() + "\n" + text_line();
    ins.active_oracle = static_cast<std::size_t>(pick(0, alts));
    return ins;
  }

  tgen::model::RulePrompt rule_prompt() {
    tgen::model::RulePrompt rp;
    rp.scaffold = "::instructions::\n{FOCAL_METHOD}\n{RULES}\n" + text_line();
    const int rules = pick(0, 4);
    for (int i = 0; i < rules; ++i) rp.rules.push_back(text_line());
    rp.version = pick(1, 40);
    if (flip()) rp.lineage = rp.version - pick(1, rp.version);
    return rp;
  }

  int pick(int lo, int hi) {
    return static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)) + lo;
  }
  bool flip() { return rng_() % 2 == 0; }

  std::string word() {
    static const char* const kWords[] = {
        "alpha", "bravo", "lime",  "delta", "42",   "true",
        "rect",  "oval",  "small", "large", "blue", "7"};
    return kWords[rng_() % (sizeof(kWords) / sizeof(kWords[0]))];
  }

  std::string ident() {
    std::string s(1, static_cast<char>('a' + pick(0, 25)));
    const int len = pick(2, 8);
    for (int i = 0; i < len; ++i) {
      s.push_back(static_cast<char>(flip() ? 'a' + pick(0, 25) : '0' + pick(0, 9)));
    }
    return s;
  }

  std::string type_name() {
    std::string s = ident();
    s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
  }

  std::string vp_name(std::size_t ordinal) {
    return ident() + "_" + std::to_string(ordinal);
  }

  std::string hex_string(int n) {
    static const char* kHex = "0123456789abcdef";
    std::string s;
    for (int i = 0; i < n; ++i) s.push_back(kHex[rng_() % 16]);
    return s;
  }

  // Free text with the characters JSON handling tends to trip on: quotes,
  // backslashes, newlines, tabs, multi-byte UTF-8.
  std::string text_line() {
    static const char* const kChunks[] = {
        "plain words",      "quote \" inside",  "back\\slash",
        "tab\tseparated",   "angle <brackets>", "pi \xcf\x80 value",
        "arrow \xe2\x86\x92 next", "brace {x}",  "newline\ncontinued"};
    std::string s = kChunks[rng_() % (sizeof(kChunks) / sizeof(kChunks[0]))];
    s += " ";
    s += word();
    return s;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace testutil
