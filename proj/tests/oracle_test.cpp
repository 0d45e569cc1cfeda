// Copyright 2026 The Forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "forge/oracle/analyzer.hpp"
#include "forge/syntax/tree.hpp"

namespace forge::oracle {
namespace {

namespace fs = std::filesystem;

const fs::path kFixtures = FORGE_FIXTURES;

struct Planted {
  std::string language;
  std::string cwe;
  fs::path vuln;
  fs::path fixed;
};

std::vector<Planted> planted_corpus() {
  std::vector<Planted> out;
  for (const auto& lang_dir : fs::directory_iterator(kFixtures / "planted")) {
    for (const auto& cwe_dir : fs::directory_iterator(lang_dir)) {
      for (const auto& f : fs::directory_iterator(cwe_dir)) {
        const std::string name = f.path().stem().string();
        if (name.size() < 5 || name.substr(name.size() - 5) != "_vuln") continue;
        fs::path fixed = f.path();
        fixed.replace_filename(name.substr(0, name.size() - 5) + "_fixed" + f.path().extension().string());
        out.push_back({lang_dir.path().filename().string(), cwe_dir.path().filename().string(),
                       f.path(), fixed});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Planted& a, const Planted& b) { return a.vuln < b.vuln; });
  return out;
}

const syntax::Grammar& py() { return *syntax::find_grammar("python"); }
const syntax::Grammar& js() { return *syntax::find_grammar("javascript"); }

TEST(PlantedCorpus, HasRequiredShape) {
  const auto corpus = planted_corpus();
  std::map<std::string, int> per_pair;
  for (const auto& p : corpus) {
    ASSERT_TRUE(fs::exists(p.fixed)) << p.fixed;
    ++per_pair[p.language + "/" + p.cwe];
  }
  EXPECT_GE(per_pair.size(), 6u);
  for (const auto& [pair, n] : per_pair) EXPECT_GE(n, 5) << pair;
}

TEST(PlantedCorpus, VulnerableFlaggedFixedClean) {
  const RuleSet rules = RuleSet::builtin();
  for (const auto& p : planted_corpus()) {
    const std::string vuln = read_text(p.vuln);
    const std::string fixed = read_text(p.fixed);
    ASSERT_TRUE(syntax_check(vuln, p.language).ok) << p.vuln;
    ASSERT_TRUE(syntax_check(fixed, p.language).ok) << p.fixed;

    const AnalysisReport bad = analyze(vuln, p.language, rules.rules());
    const bool planted_found = std::any_of(bad.findings.begin(), bad.findings.end(), [&](const Finding& f) {
      return f.pair.language == p.language && f.pair.cwe == p.cwe;
    });
    EXPECT_TRUE(planted_found) << p.vuln;

    const AnalysisReport good = analyze(fixed, p.language, rules.rules());
    EXPECT_TRUE(is_secure(good)) << p.fixed << ": " << Json(good).dump();
    EXPECT_TRUE(bad.skipped_rules.empty());
  }
}

TEST(SyntaxCheck, Examples) {
  EXPECT_TRUE(syntax_check("def f():\n    return 1", "python").ok);
  const SyntaxResult broken = syntax_check("def f(:", "python");
  EXPECT_FALSE(broken.ok);
  EXPECT_NE(broken.detail.find("line 1"), std::string::npos);
  EXPECT_TRUE(syntax_check("x => x", "js").ok);
  EXPECT_THROW(syntax_check("int main() {}", "c"), ConfigError);
}

// Every snippet in the corpus was accepted by the language's own front end
// (python3 -m py_compile, node --check) when the corpus was assembled.
TEST(SyntaxCheck, ValidCorpus) {
  int count = 0;
  for (const auto& f : fs::directory_iterator(kFixtures / "syntax_valid")) {
    const std::string ext = f.path().extension().string();
    const std::string lang = ext == ".py" ? "python" : "javascript";
    const SyntaxResult r = syntax_check(read_text(f.path()), lang);
    EXPECT_TRUE(r.ok) << f.path() << ": " << r.detail;
    ++count;
  }
  EXPECT_EQ(count, 50);
}

TEST(SyntaxCheck, InvalidCorpus) {
  int count = 0;
  for (const auto& f : fs::directory_iterator(kFixtures / "syntax_invalid")) {
    const std::string lang = f.path().extension() == ".py" ? "python" : "javascript";
    EXPECT_FALSE(syntax_check(read_text(f.path()), lang).ok) << f.path();
    ++count;
  }
  EXPECT_GT(count, 0);
}

TEST(Analyze, ShellCallExample) {
  const auto rules = RuleSet::builtin().rules();
  const std::string bad = "import os\n\ndef run(user):\n    os.system('ls ' + user)\n";
  const AnalysisReport r = analyze(bad, "python", rules);
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].pair.cwe, "CWE-78");
  EXPECT_EQ(r.findings[0].start_line, 4);
  EXPECT_EQ(r.findings[0].rule_id, "py-os-shell-call");
  EXPECT_EQ(r.findings[0].message, "os.system runs a shell command built from 'ls ' + user");

  const std::string good =
      "import subprocess\n\ndef run(user):\n    subprocess.run(['ls', '--', user])\n";
  EXPECT_TRUE(is_secure(analyze(good, "python", rules)));
  const std::string constant = "import os\nos.system('ls -l')\n";
  EXPECT_TRUE(is_secure(analyze(constant, "python", rules)));
}

TEST(Analyze, EmptyAndBrokenCode) {
  const auto rules = RuleSet::builtin().rules();
  const AnalysisReport empty = analyze("", "python", rules);
  EXPECT_TRUE(empty.findings.empty());
  EXPECT_FALSE(empty.best_effort);
  const AnalysisReport broken = analyze("import os\nos.system('x' + y\n", "python", rules);
  EXPECT_TRUE(broken.best_effort);
}

TEST(Analyze, SortedAndDeduplicated) {
  const auto rules = RuleSet::builtin().rules();
  const std::string code =
      "def f(c, a, b):\n"
      "    c.execute(f\"SELECT * FROM t WHERE a = {a}\")\n"
      "    c.execute(\"SELECT * FROM t WHERE b = \" + b)\n"
      "    return f\"<p>{a}</p>\"\n";
  const AnalysisReport r = analyze(code, "python", rules);
  ASSERT_GE(r.findings.size(), 3u);
  for (std::size_t i = 1; i < r.findings.size(); ++i) {
    const auto& p = r.findings[i - 1];
    const auto& q = r.findings[i];
    EXPECT_LE(std::tie(p.start_line, p.rule_id), std::tie(q.start_line, q.rule_id));
    EXPECT_FALSE(p.rule_id == q.rule_id && p.start_line == q.start_line && p.end_line == q.end_line);
  }
}

TEST(Analyze, DeterministicAndMonotone) {
  const auto all = RuleSet::builtin().rules();
  std::mt19937_64 rng(7);
  for (const auto& p : planted_corpus()) {
    const std::string code = read_text(p.vuln);
    const AnalysisReport full = analyze(code, p.language, all);
    EXPECT_EQ(Json(full).dump(), Json(analyze(code, p.language, all)).dump());
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<Rule> subset;
      for (const Rule& r : all) {
        if (rng() % 2) subset.push_back(r);
      }
      const AnalysisReport part = analyze(code, p.language, subset);
      for (const Finding& f : part.findings) {
        const bool present = std::any_of(full.findings.begin(), full.findings.end(), [&](const Finding& g) {
          return g.rule_id == f.rule_id && g.start_line == f.start_line && g.end_line == f.end_line;
        });
        EXPECT_TRUE(present);
      }
    }
  }
}

TEST(Query, CompileErrors) {
  EXPECT_THROW(Query::compile("(call", py()), ConfigError);
  EXPECT_THROW(Query::compile("(no_such_node)", py()), ConfigError);
  EXPECT_THROW(Query::compile("(call nofield: (_))", py()), ConfigError);
  EXPECT_THROW(Query::compile("(call)/[/", py()), ConfigError);
  EXPECT_THROW(Query::compile("(call)/x/g", py()), ConfigError);
  EXPECT_THROW(Query::compile("[]", py()), ConfigError);
  EXPECT_THROW(Query::compile("(call) (call)", py()), ConfigError);
  EXPECT_NO_THROW(Query::compile("(call_expression) ; comment", js()));
}

int count_matches(const Query& q, const syntax::Tree& t) {
  int n = 0;
  for (syntax::NodeId i = 0; i < t.size(); ++i) n += q.match(t, i).has_value();
  return n;
}

TEST(Query, Semantics) {
  const syntax::Tree t = syntax::parse_python("f(a, 'x')\ng(1)\nh()\n");
  EXPECT_EQ(count_matches(Query::compile("(call)", py()), t), 3);
  EXPECT_EQ(count_matches(Query::compile("(call function: (identifier)/^[fg]$/)", py()), t), 2);
  EXPECT_EQ(count_matches(Query::compile("(call function: (_)!/^[fg]$/)", py()), t), 1);
  EXPECT_EQ(count_matches(Query::compile("(argument_list #0: (identifier))", py()), t), 1);
  EXPECT_EQ(count_matches(Query::compile("(argument_list #-1: (string))", py()), t), 1);
  EXPECT_EQ(count_matches(Query::compile("(argument_list (string))", py()), t), 1);
  EXPECT_EQ(count_matches(Query::compile("(argument_list (not (_)))", py()), t), 1);
  EXPECT_EQ(count_matches(Query::compile("(call (has (integer)))", py()), t), 1);
  EXPECT_EQ(count_matches(Query::compile("(call (not (has [(integer) (string)])))", py()), t), 1);
  EXPECT_EQ(count_matches(Query::compile("(module (has (call)/^H/i))", py()), t), 1);
}

TEST(Query, CapturesAndMessages) {
  const syntax::Tree t = syntax::parse_javascript("cp.exec(`run ${   a   +\n b}`);");
  const Query q = Query::compile(
      "(call_expression function: (member_expression property: (_) @fn) arguments: (arguments #0: (_) @arg))",
      js());
  std::optional<Captures> caps;
  for (syntax::NodeId i = 0; i < t.size() && !caps; ++i) caps = q.match(t, i);
  ASSERT_TRUE(caps.has_value());
  EXPECT_EQ(render_message("{fn}: {arg} {missing}", t, *caps), "exec: `run ${ a + b}` {missing}");
}

TEST(Query, FailedBranchLeavesNoCaptures) {
  const syntax::Tree t = syntax::parse_python("f(x)\n");
  const Query q = Query::compile("[(call function: (_) @a (argument_list (string))) (call @b)]", py());
  std::optional<Captures> caps;
  for (syntax::NodeId i = 0; i < t.size() && !caps; ++i) caps = q.match(t, i);
  ASSERT_TRUE(caps.has_value());
  ASSERT_EQ(caps->size(), 1u);
  EXPECT_EQ((*caps)[0].first, "b");
}

TEST(RulePack, ParsesDefinesAndRejectsBadPacks) {
  const CwePair pair = make_cwe_pair("python", "CWE-78");
  const auto rules = parse_rule_pack(
      "# demo\n"
      "define CALL\n"
      "  (call)\n"
      "rule demo-1\n"
      "message found {c}\n"
      "pattern\n"
      "  $CALL @c\n",
      pair, "demo.rules");
  ASSERT_EQ(rules.size(), 1u);
  EXPECT_EQ(rules[0].pattern, "(call) @c");
  EXPECT_THROW(parse_rule_pack("rule x\npattern\n  $NOPE\n", pair, "a"), ConfigError);
  EXPECT_THROW(parse_rule_pack("rule x\nmessage m\n", pair, "a"), ConfigError);
  EXPECT_THROW(parse_rule_pack("rule x\npattern\n  (bogus)\n", pair, "a"), ConfigError);
  EXPECT_THROW(parse_rule_pack("oops\n", pair, "a"), ConfigError);
  EXPECT_THROW(RuleSet({rules[0], rules[0]}), ConfigError);
}

TEST(RulePack, BuiltinCoversDemoPairs) {
  const RuleSet rules = RuleSet::builtin();
  const auto pairs = rules.pairs();
  for (const char* lang : {"python", "javascript"}) {
    for (const char* cwe : {"CWE-78", "CWE-79", "CWE-89"}) {
      EXPECT_TRUE(pairs.count(make_cwe_pair(lang, cwe))) << lang << " " << cwe;
    }
  }
  EXPECT_NE(rules.find("py-os-shell-call"), nullptr);
  EXPECT_EQ(rules.find("nope"), nullptr);
  const RuleSet from_disk = RuleSet::load_dir(fs::path(FORGE_SOURCE_DIR) / "rules");
  EXPECT_EQ(from_disk.rules().size(), rules.rules().size());
}

class ExternalTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("forge-ext-" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string script(const std::string& name, const std::string& body) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << "#!/bin/sh\n" << body;
    fs::permissions(p, fs::perms::owner_all);
    return p.string();
  }

  fs::path dir_;
};

TEST_F(ExternalTest, EmptyArray) {
  const std::string s = script("empty.sh", "echo '[]'\n");
  const AnalysisReport r = run_external(s + " {file}", "x = 1\n", "python");
  EXPECT_TRUE(r.findings.empty());
  EXPECT_EQ(r.analyzer, AnalyzerKind::kExternal);
  EXPECT_TRUE(is_secure(r));
}

TEST_F(ExternalTest, OneFindingAndFileIsPassed) {
  const std::string s = script(
      "one.sh",
      "test -f \"$1\" || exit 9\n"
      "echo '[{\"cwe\": \"CWE-89\", \"rule\": \"sqli\", \"message\": \"m\", \"start_line\": 3, \"end_line\": 4}]'\n");
  const AnalysisReport r = run_external(s + " {file}", "a\nb\nc\nd\n", "python");
  ASSERT_EQ(r.findings.size(), 1u);
  const Finding& f = r.findings[0];
  EXPECT_EQ(f.pair.cwe, "CWE-89");
  EXPECT_EQ(f.pair.language, "python");
  EXPECT_EQ(f.rule_id, "sqli");
  EXPECT_EQ(f.start_line, 3);
  EXPECT_EQ(f.end_line, 4);
  EXPECT_TRUE(f.mapped);
}

TEST_F(ExternalTest, FailureWithoutJson) {
  const std::string s = script("bad.sh", "echo 'garbage'\nexit 2\n");
  EXPECT_THROW(run_external(s + " {file}", "x", "python"), AnalyzerError);
  EXPECT_THROW(ExternalAnalyzer(ExternalOptions{"echo", {}, 1}), ConfigError);
}

TEST_F(ExternalTest, UnmappedFindingsAreInsecure) {
  const std::string s = script(
      "unmapped.sh", "echo '[{\"cwe\": \"B602\", \"rule\": \"r\", \"message\": \"m\", \"start_line\": 1, \"end_line\": 1}]'\n");
  const AnalysisReport r = run_external(s + " {file}", "x", "python");
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_FALSE(r.findings[0].mapped);
  EXPECT_FALSE(is_secure(r));

  const std::string k = script(
      "known.sh", "echo '[{\"cwe\": \"CWE-22\", \"rule\": \"r\", \"message\": \"m\", \"start_line\": 1, \"end_line\": 1}]'\n");
  ExternalAnalyzer a(ExternalOptions{k + " {file}", {"CWE-78"}, 2});
  EXPECT_FALSE(a.run("x", "python").findings[0].mapped);
}

}  // namespace
}  // namespace forge::oracle
