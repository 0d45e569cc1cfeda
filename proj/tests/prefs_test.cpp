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
#include <set>

#include "forge/error.hpp"
#include "forge/prefs.hpp"

namespace forge::prefs {
namespace {

namespace fs = std::filesystem;

const fs::path kFixtures = FORGE_FIXTURES;
const CwePair kPy78 = make_cwe_pair("python", "CWE-78");

std::string fence(const std::string& code, const std::string& tag = "python") {
  return "Sure.\n```" + tag + "\n" + code + "```\nDone.";
}

const std::string kVulnA = "import os\n\n\ndef run(name):\n    os.system(\"ls \" + name)\n";
const std::string kVulnB = "import os\n\n\ndef run(path):\n    os.popen(\"cat \" + path).read()\n";
const std::string kFix1 = "import subprocess\n\n\ndef run(name):\n    subprocess.run([\"ls\", name])\n";
const std::string kFix2 = "import subprocess\n\n\ndef run(name):\n    subprocess.run([\"ls\", \"--\", name])\n";
const std::string kFix3 = "import subprocess\n\n\ndef run(name):\n    subprocess.call([\"ls\", name])\n";
const std::string kStub = "import subprocess\n\n\ndef run(name):\n    # rest of the code remains unchanged\n    subprocess.run([\"ls\", name])\n";
const std::string kBroken = "def run(name:\n    pass\n";

oracle::BuiltinOracle builtin() { return oracle::BuiltinOracle(oracle::RuleSet::builtin()); }

Json rule(const Json& contains, const std::vector<std::string>& responses) {
  return Json{{"contains", contains}, {"responses", responses}};
}

llm::GenerationParams params(int n) { return llm::GenerationParams{0.8, 1.0, 512, n, 11}; }

TEST(Extract, FirstFenceAtLineStart) {
  EXPECT_EQ(extract_code_block("```python\nx = 1\n```"), std::optional<std::string>("x = 1\n"));
  EXPECT_EQ(extract_code_block("a\n```\ny\n```\n```js\nz\n```"), std::optional<std::string>("y\n"));
  EXPECT_EQ(extract_code_block("inline ```x``` only"), std::nullopt);
  EXPECT_EQ(extract_code_block("```python\nnever closed"), std::nullopt);
  EXPECT_EQ(extract_code_block("no code"), std::nullopt);
  EXPECT_EQ(extract_code_block("~~~\nnope\n~~~"), std::nullopt);
}

TEST(Sample, IdsAreContentHashes) {
  llm::ScriptedClient mock(Json{{"rules", {rule("task", {fence(kFix1), fence(kFix1)})}}});
  const auto x = make_normal_instruction("task");
  auto s = sample_responses(x, "python", 2, params(2), mock);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].id, sample_id(x.id, kFix1, 11, 0));
  EXPECT_EQ(s[1].id, sample_id(x.id, kFix1, 11, 1));
  EXPECT_NE(s[0].id, s[1].id);
  EXPECT_EQ(s[0].text, kFix1);
  EXPECT_EQ(s[1].sample_index, 1);
}

TEST(Sample, FencelessCompletionsDropped) {
  llm::ScriptedClient mock(Json{{"rules", {rule("task", {fence("a = 1\n"), fence("b = 2\n"), fence("c = 3\n"),
                                                         fence("d = 4\n"), "just prose"})}}});
  const auto x = make_normal_instruction("task");
  EXPECT_EQ(sample_responses(x, "python", 25, params(25), mock).size(), 20u);
  EXPECT_EQ(sample_responses(x, "python", 3, params(3), mock).size(), 3u);
  EXPECT_THROW(sample_responses(x, "python", 0, params(1), mock), ValidationError);
}

TEST(Sample, ClientFailureIsStageError) {
  llm::ScriptedClient mock(Json::parse(R"({"rules": [{"contains": "zzz", "response": "x"}]})"));
  const auto x = make_normal_instruction("task");
  try {
    sample_responses(x, "python", 1, params(1), mock);
    FAIL();
  } catch (const StageError& e) {
    EXPECT_EQ(e.subject(), x.id);
  }
}

std::vector<CodeSample> planted(const std::string& suffix) {
  std::vector<CodeSample> out;
  for (const auto& lang : fs::directory_iterator(kFixtures / "planted")) {
    for (const auto& cwe : fs::directory_iterator(lang)) {
      for (const auto& f : fs::directory_iterator(cwe)) {
        if (f.path().stem().string().find(suffix) == std::string::npos) continue;
        CodeSample s;
        s.text = read_text(f.path());
        s.language = lang.path().filename().string();
        s.id = f.path().string();
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

TEST(Partition, PlantedFixtures) {
  const auto oracle = builtin();
  const auto vuln = planted("_vuln");
  const auto fixed = planted("_fixed");
  ASSERT_GE(vuln.size(), 30u);
  auto pv = partition_by_security(vuln, oracle);
  EXPECT_EQ(pv.vulnerable.size(), vuln.size());
  EXPECT_TRUE(pv.clean.empty());
  auto pf = partition_by_security(fixed, oracle);
  EXPECT_EQ(pf.clean.size(), fixed.size());
  EXPECT_TRUE(pf.vulnerable.empty());
  for (const auto& s : pf.clean) EXPECT_TRUE(s.report.has_value());

  auto empty = partition_by_security({}, oracle);
  EXPECT_TRUE(empty.vulnerable.empty() && empty.clean.empty() && empty.invalid == 0);
  CodeSample broken;
  broken.text = kBroken;
  broken.language = "python";
  EXPECT_EQ(partition_by_security({broken}, oracle).invalid, 1u);
}

CodeSample vulnerable_sample(const Instruction& x_v, const std::string& code) {
  CodeSample y_v;
  y_v.instruction_id = x_v.id;
  y_v.text = code;
  y_v.language = "python";
  y_v.id = sample_id(x_v.id, code, 11, 0);
  y_v.report = builtin().analyze(code, "python");
  return y_v;
}

TEST(Fix, PromptCarriesFeedbackTaskAndCode) {
  const auto x_n = make_normal_instruction("list files");
  const auto x_v = make_vuln_instruction("List a directory named by the user.", kPy78, x_n);
  const auto y_v = vulnerable_sample(x_v, kVulnA);
  ASSERT_FALSE(y_v.report->findings.empty());
  const std::string p = fix_prompt(x_v, y_v);
  EXPECT_EQ(p.find("[["), std::string::npos);
  EXPECT_NE(p.find("You are a security expert"), std::string::npos);
  EXPECT_NE(p.find("The relevant coding task is: " + x_v.text), std::string::npos);
  EXPECT_NE(p.find("```python\n" + kVulnA), std::string::npos);
  EXPECT_NE(p.find("- py-os-shell-call CWE-78 (line 5):"), std::string::npos) << p;
  EXPECT_EQ(analyzer_feedback(oracle::AnalysisReport{}), "");
}

TEST(Fix, RetainsOnlySecureFixes) {
  const auto x_n = make_normal_instruction("list files");
  const auto x_v = make_vuln_instruction("List a directory named by the user.", kPy78, x_n);
  const auto y_v = vulnerable_sample(x_v, kVulnA);
  const auto oracle = builtin();
  {
    llm::ScriptedClient mock(Json{{"rules", {rule("security expert", {fence(kFix1)})}}});
    auto fixes = request_fix(x_v, y_v, params(1), mock, oracle);
    ASSERT_EQ(fixes.size(), 1u);
    EXPECT_EQ(fixes[0].fix_of, y_v.id);
    EXPECT_TRUE(oracle::is_secure(*fixes[0].report));
  }
  {
    llm::ScriptedClient mock(Json{{"rules", {rule("security expert", {fence(kVulnA), fence(kBroken)})}}});
    EXPECT_TRUE(request_fix(x_v, y_v, params(2), mock, oracle).empty());
  }
  {
    llm::ScriptedClient mock(Json{{"rules", {rule("security expert", {fence(kStub)})}}});
    EXPECT_EQ(request_fix(x_v, y_v, params(1), mock, oracle).size(), 1u);
  }
}

struct World {
  Instruction x_n = make_normal_instruction("Write a program that lists a folder.", std::string("python"));
  Instruction x_v = make_vuln_instruction("Write run(name) that lists the folder called name.", kPy78, x_n);
  InstructionStore store{{x_n.id, x_n}, {x_v.id, x_v}};
};

BuildOptions options(int vuln, int fix, int norm, int max_pairs = 4, int max_norm = 8) {
  BuildOptions o;
  o.vuln_params = params(vuln);
  o.fix_params = params(fix);
  o.norm_params = params(norm);
  o.max_pairs_per_instruction = max_pairs;
  o.max_norm_per_sec = max_norm;
  o.max_inflight = 2;
  return o;
}

TEST(BuildSec, TwoVulnerableOneFixEach) {
  World w;
  llm::ScriptedClient mock(Json{{"rules",
                                 {rule({"security expert", "ls \" + name"}, {fence(kFix1)}),
                                  rule({"security expert", "cat \" + path"}, {fence(kFix2)}),
                                  rule("lists the folder called", {fence(kVulnA), fence(kVulnB)})}}});
  auto b = build_sec({w.x_v}, builtin(), mock, options(2, 1, 1));
  ASSERT_EQ(b.triples.size(), 2u);
  std::multiset<std::pair<std::string, std::string>> texts;
  for (const auto& t : b.triples) {
    texts.insert({b.samples.at(t.y_f).text, b.samples.at(t.y_v).text});
    EXPECT_EQ(t.x_v, w.x_v.id);
    EXPECT_EQ(t.pair, kPy78);
    EXPECT_EQ(t.id, sec_triple_id(t.x_v, t.y_f, t.y_v));
    EXPECT_FALSE(t.findings_fixed.empty());
  }
  EXPECT_EQ(texts, (std::multiset<std::pair<std::string, std::string>>{{kFix1, kVulnA}, {kFix2, kVulnB}}));
  EXPECT_EQ(b.counts.vulnerable, 2u);
  EXPECT_EQ(b.counts.fix_requests, 2u);
  EXPECT_EQ(b.counts.fixes_retained, 2u);
  EXPECT_EQ(b.samples.size(), 4u);
}

TEST(BuildSec, CapKeepsSmallestIds) {
  World w;
  llm::ScriptedClient mock(Json{{"rules",
                                 {rule("security expert", {fence(kFix1), fence(kFix2), fence(kFix3)}),
                                  rule("lists the folder called", {fence(kVulnA)})}}});
  auto all = build_sec({w.x_v}, builtin(), mock, options(1, 3, 1, 10));
  ASSERT_EQ(all.triples.size(), 3u);
  auto capped = build_sec({w.x_v}, builtin(), mock, options(1, 3, 1, 2));
  ASSERT_EQ(capped.triples.size(), 2u);
  std::vector<std::string> ids;
  for (const auto& t : all.triples) ids.push_back(t.id);
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(capped.triples[0].id, ids[0]);
  EXPECT_EQ(capped.triples[1].id, ids[1]);
  EXPECT_EQ(capped.samples.size(), 3u);
}

TEST(BuildSec, NoSecureFixCounted) {
  World w;
  llm::ScriptedClient mock(Json{{"rules",
                                 {rule("security expert", {fence(kVulnA)}),
                                  rule("lists the folder called", {fence(kVulnA), fence(kFix1)})}}});
  auto b = build_sec({w.x_v}, builtin(), mock, options(2, 1, 1));
  EXPECT_TRUE(b.triples.empty());
  EXPECT_EQ(b.counts.no_secure_fix, 1u);
  EXPECT_TRUE(b.samples.empty());
  EXPECT_THROW(build_sec({w.x_n}, builtin(), mock, options(1, 1, 1)), ValidationError);
}

TEST(BuildSec, PolarityIsRecheckable) {
  World w;
  llm::ScriptedClient mock(Json{{"rules",
                                 {rule("security expert", {fence(kFix1), fence(kFix2)}),
                                  rule("lists the folder called", {fence(kVulnA), fence(kVulnB)})}}});
  const auto oracle = builtin();
  auto b = build_sec({w.x_v}, oracle, mock, options(2, 2, 1));
  ASSERT_EQ(b.triples.size(), 4u);
  for (const auto& t : b.triples) {
    EXPECT_FALSE(oracle::is_secure(oracle.analyze(b.samples.at(t.y_v).text, "python")));
    EXPECT_TRUE(oracle::is_secure(oracle.analyze(b.samples.at(t.y_f).text, "python")));
  }
}

TEST(BuildNorm, CapAndInsecureAndIntegrity) {
  World w;
  const std::string clean1 = "import os\n\nprint(os.listdir('.'))\n";
  const std::string clean2 = "import os\n\nfor e in os.scandir('.'):\n    print(e.name)\n";
  const std::string clean3 = "from pathlib import Path\n\nprint(list(Path('.').iterdir()))\n";
  llm::ScriptedClient mock(Json{{"rules",
                                 {rule("security expert", {fence(kFix1)}),
                                  rule("lists the folder called", {fence(kVulnA)}),
                                  rule("lists a folder.", {fence(clean1), fence(clean2), fence(clean3)})}}});
  const auto oracle = builtin();
  auto sec = build_sec({w.x_v}, oracle, mock, options(1, 1, 3));
  ASSERT_EQ(sec.triples.size(), 1u);
  auto norm = build_norm(sec.triples, w.store, oracle, mock, options(1, 1, 3, 4, 2));
  ASSERT_EQ(norm.triples.size(), 2u);
  for (const auto& n : norm.triples) {
    EXPECT_EQ(n.x_n, w.x_n.id);
    EXPECT_EQ(n.sec_link, sec.triples[0].id);
    EXPECT_EQ(n.y_f, sec.triples[0].y_f);
    EXPECT_TRUE(norm.samples.count(n.y_n));
    EXPECT_EQ(n.id, norm_triple_id(n.x_n, n.y_n, n.y_f, n.sec_link));
  }

  llm::ScriptedClient insecure(Json{{"rules", {rule("lists a folder.", {fence(kVulnA)})}}});
  auto none = build_norm(sec.triples, w.store, oracle, insecure, options(1, 1, 2));
  EXPECT_TRUE(none.triples.empty());
  EXPECT_EQ(none.counts.norm_links_empty, 1u);
}

TEST(BuildNorm, OrphansListed) {
  World w;
  InstructionStore missing{{w.x_v.id, w.x_v}};
  SecTriple t{"sec-1", w.x_v.id, "f", "v", kPy78, {}};
  llm::ScriptedClient mock(Json::parse(R"({"default": "x"})"));
  try {
    build_norm({t}, missing, builtin(), mock, options(1, 1, 1));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("sec-1"), std::string::npos);
  }
}

TEST(Build, ByteStableAcrossRunsAndParallelism) {
  World w;
  const Json script{{"rules",
                     {rule("security expert", {fence(kFix1), fence(kFix2)}),
                      rule("lists the folder called", {fence(kVulnA), fence(kVulnB), fence(kFix3)}),
                      rule("lists a folder.", {fence(kFix3), fence(kVulnA)})}}};
  std::vector<std::string> dumps;
  for (int inflight : {1, 4}) {
    llm::ScriptedClient mock(script);
    auto o = options(3, 2, 2);
    o.max_inflight = inflight;
    auto sec = build_sec({w.x_v}, builtin(), mock, o);
    auto norm = build_norm(sec.triples, w.store, builtin(), mock, o);
    Json all{{"sec", sec.triples}, {"norm", norm.triples}, {"samples", Json::array()}};
    for (const auto& [id, s] : sec.samples) all["samples"].push_back(s);
    for (const auto& [id, s] : norm.samples) all["samples"].push_back(s);
    dumps.push_back(canonical(all));
  }
  EXPECT_EQ(dumps[0], dumps[1]);
}

TEST(Records, RoundTrip) {
  World w;
  CodeSample s = vulnerable_sample(w.x_v, kVulnA);
  s.fix_of = "abc";
  const std::string once = canonical(Json(s));
  EXPECT_EQ(canonical(Json(Json::parse(once).get<CodeSample>())), once);
  SecTriple t{"i", "a", "b", "c", kPy78, {"r1", "r2"}};
  EXPECT_EQ(Json(t).get<SecTriple>(), t);
  NormTriple n{"i", "a", "b", "c", "d"};
  EXPECT_EQ(Json(n).get<NormTriple>(), n);
}

}  // namespace
}  // namespace forge::prefs
