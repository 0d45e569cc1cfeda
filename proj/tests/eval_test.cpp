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

#include <algorithm>
#include <filesystem>
#include <random>

#include "forge/error.hpp"
#include "forge/eval.hpp"
#include "forge/io.hpp"

namespace forge::eval {
namespace {

namespace fs = std::filesystem;

const fs::path kPlanted = fs::path(FORGE_FIXTURES) / "planted";
const CwePair kPy78 = make_cwe_pair("python", "CWE-78");
const CwePair kJs89 = make_cwe_pair("javascript", "CWE-89");

std::string planted(const CwePair& p, const std::string& name) {
  const std::string ext = p.language == "python" ? ".py" : ".js";
  return read_text(kPlanted / p.language / p.cwe / (name + ext));
}

std::string fence(const std::string& code) { return "```\n" + code + "```\n"; }

oracle::BuiltinOracle builtin() { return oracle::BuiltinOracle(oracle::RuleSet::builtin()); }

llm::GenerationParams params(int n) { return llm::GenerationParams{0.8, 1.0, 512, n, 3}; }

Instruction task(const std::string& text, const CwePair& pair) {
  return make_vuln_instruction(text, pair, make_normal_instruction("origin: " + text));
}

// `bad` vulnerable completions out of `n`, spread with a fixed shuffle.
std::vector<std::string> scripted(const CwePair& p, int bad, int n, std::uint64_t order) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(fence(planted(p, i < bad ? "01_vuln" : "01_fixed")));
  std::shuffle(out.begin(), out.end(), std::mt19937_64(order));
  return out;
}

Json rule(const std::string& contains, const std::vector<std::string>& responses) {
  return Json{{"contains", Json::array({contains})}, {"responses", responses}};
}

TEST(SecureRatio, ScriptedFractionsAreExact) {
  llm::ScriptedClient mock(Json{{"rules",
                                 {rule("alpha task", scripted(kPy78, 3, 10, 1)),
                                  rule("beta task", scripted(kPy78, 3, 10, 2)),
                                  rule("gamma task", scripted(kJs89, 7, 10, 3))}}});
  const auto oracle = builtin();
  std::vector<Instruction> suite{task("alpha task", kPy78), task("beta task", kPy78), task("gamma task", kJs89)};
  const EvalReport r = secure_ratio(suite, mock, oracle, 10, params(10), 3);
  ASSERT_EQ(r.per_pair.size(), 2u);
  EXPECT_EQ(r.per_pair.at(kPy78).n_samples, 20);
  EXPECT_EQ(r.per_pair.at(kPy78).n_vulnerable, 6);
  EXPECT_EQ(r.per_pair.at(kPy78).ratio, 0.3);
  EXPECT_EQ(r.per_pair.at(kJs89).n_vulnerable, 7);
  EXPECT_EQ(r.per_pair.at(kJs89).ratio, 0.7);
  EXPECT_EQ(r.aggregate_ratio, 0.5);
  EXPECT_EQ(r.micro_ratio, 13.0 / 30.0);
  EXPECT_EQ(r.samples.size(), 30u);
  EXPECT_EQ(r.failed_instructions, 0u);

  // Order of the suite does not matter.
  std::reverse(suite.begin(), suite.end());
  const EvalReport again = secure_ratio(suite, mock, oracle, 10, params(10), 1);
  EXPECT_EQ(Json(again).dump(), Json(r).dump());
  std::vector<Json> a, b;
  for (const auto& v : r.samples) a.push_back(v);
  for (const auto& v : again.samples) b.push_back(v);
  EXPECT_EQ(a, b);
}

TEST(SecureRatio, AllFixedAndAllVulnerable) {
  const auto oracle = builtin();
  llm::ScriptedClient clean(Json{{"rules", {rule("task", {fence(planted(kPy78, "02_fixed"))})}}});
  llm::ScriptedClient dirty(Json{{"rules", {rule("task", {fence(planted(kPy78, "02_vuln"))})}}});
  const std::vector<Instruction> suite{task("a task", kPy78)};
  EXPECT_EQ(secure_ratio(suite, clean, oracle, 4, params(4)).aggregate_ratio, 0.0);
  EXPECT_EQ(secure_ratio(suite, dirty, oracle, 4, params(4)).aggregate_ratio, 1.0);
  EXPECT_THROW(secure_ratio(suite, clean, oracle, 0, params(1)), ValidationError);
  Instruction untagged = make_normal_instruction("no pair");
  EXPECT_THROW(secure_ratio({untagged}, clean, oracle, 1, params(1)), ValidationError);
}

TEST(SecureRatio, ClientFailureGivesPartialReport) {
  Json script{{"rules",
               {Json{{"contains", {"broken task"}}, {"responses", {"x"}}, {"fail_first", 1000}, {"status", 400}},
                rule("fine task", scripted(kPy78, 1, 4, 9))}}};
  llm::ScriptedClient mock(script);
  const auto oracle = builtin();
  const EvalReport r =
      secure_ratio({task("broken task", kPy78), task("fine task", kPy78)}, mock, oracle, 4, params(4));
  EXPECT_EQ(r.instructions, 2u);
  EXPECT_EQ(r.failed_instructions, 1u);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.per_pair.at(kPy78).n_samples, 4);
  EXPECT_EQ(r.per_pair.at(kPy78).ratio, 0.25);
  EXPECT_EQ(Json(r)["coverage"]["failed"], 1);
}

TEST(Trigger, TwentyFiveTimes) {
  const auto oracle = builtin();
  const Instruction x_n = make_normal_instruction("plain listing job", "python");
  const Instruction x_v = make_vuln_instruction("induced listing job", kPy78, x_n);
  llm::ScriptedClient mock(Json{{"rules",
                                 {rule("induced listing job", scripted(kPy78, 25, 50, 4)),
                                  rule("plain listing job", scripted(kPy78, 1, 50, 5))}}});
  const TriggerReport r = trigger_comparison({x_n}, {x_v}, mock, oracle, 50, params(50));
  EXPECT_EQ(r.induced_total, 25);
  EXPECT_EQ(r.normal_total, 1);
  EXPECT_EQ(r.induced_samples, 50);
  ASSERT_TRUE(r.ratio);
  EXPECT_EQ(*r.ratio, 25.0);
  EXPECT_EQ(r.induced_counts.at(kPy78), 25);
  EXPECT_EQ(Json(r)["ratio"], 25.0);
}

TEST(Trigger, IdenticalBehaviourAndZeroGuards) {
  const auto oracle = builtin();
  const Instruction x_n = make_normal_instruction("plain job");
  const Instruction x_v = make_vuln_instruction("induced job", kPy78, x_n);
  llm::ScriptedClient same(Json{{"rules", {rule("job", scripted(kPy78, 2, 4, 6))}}});
  auto r = trigger_comparison({x_n}, {x_v}, same, oracle, 4, params(4));
  ASSERT_TRUE(r.ratio);
  EXPECT_EQ(*r.ratio, 1.0);

  llm::ScriptedClient only_induced(Json{{"rules",
                                         {rule("induced job", scripted(kPy78, 2, 4, 7)),
                                          rule("plain job", scripted(kPy78, 0, 4, 8))}}});
  r = trigger_comparison({x_n}, {x_v}, only_induced, oracle, 4, params(4));
  ASSERT_TRUE(r.ratio);
  EXPECT_TRUE(std::isinf(*r.ratio));
  EXPECT_EQ(Json(r)["ratio"], "inf");
  EXPECT_EQ(Json(r)["induced"]["vulnerable"], 2);

  llm::ScriptedClient clean(Json{{"rules", {rule("job", scripted(kPy78, 0, 4, 9))}}});
  r = trigger_comparison({x_n}, {x_v}, clean, oracle, 4, params(4));
  EXPECT_FALSE(r.ratio);
  EXPECT_TRUE(Json(r)["ratio"].is_null());
  EXPECT_THROW(trigger_comparison({}, {x_v}, clean, oracle, 4, params(4)), ValidationError);
}

// Fix prompts are matched first; the first generation falls through to the
// task rule.
llm::ScriptedClient refine_mock(int secure_on_fix) {
  std::vector<std::string> fixes;
  for (int i = 1; i <= 12; ++i) {
    fixes.push_back(fence(planted(kPy78, i == secure_on_fix ? "03_fixed" : "03_vuln")));
  }
  if (secure_on_fix == 0) fixes.resize(1);
  return llm::ScriptedClient(Json{{"rules",
                                   {rule("fix potential CWEs", fixes),
                                    rule("refine task", {fence(planted(kPy78, "03_vuln"))})}}});
}

TEST(Refine, TableBudgets) {
  const auto oracle = builtin();
  const Instruction x = task("refine task", kPy78);
  for (int budget : {3, 5, 10}) {
    auto mock = refine_mock(3);
    const RefineResult r = iterative_refine(x, "python", mock, oracle, budget, params(1));
    if (budget == 3) {
      EXPECT_EQ(r.iters_used, 3);
      EXPECT_FALSE(r.secure);
    } else {
      EXPECT_EQ(r.iters_used, 4) << budget;
      EXPECT_TRUE(r.secure);
      EXPECT_EQ(r.final_code, planted(kPy78, "03_fixed"));
    }
    EXPECT_EQ(mock.calls(), r.iters_used);
  }
}

TEST(Refine, FirstSampleSecureAndNeverSecure) {
  const auto oracle = builtin();
  const Instruction x = task("refine task", kPy78);
  llm::ScriptedClient good(Json{{"rules", {rule("refine task", {fence(planted(kPy78, "03_fixed"))})}}});
  const RefineResult first = iterative_refine(x, "python", good, oracle, 10, params(1));
  EXPECT_EQ(first.iters_used, 1);
  EXPECT_TRUE(first.secure);

  auto never = refine_mock(0);
  const RefineResult r = iterative_refine(x, "python", never, oracle, 3, params(1));
  EXPECT_EQ(r.iters_used, 3);
  EXPECT_FALSE(r.secure);
  EXPECT_THROW(iterative_refine(x, "python", never, oracle, 0, params(1)), ValidationError);
}

TEST(Refine, SingleIterationMatchesSecureRatio) {
  const auto oracle = builtin();
  for (const std::string name : {"04_vuln", "04_fixed"}) {
    const Instruction x = task("single " + name, kPy78);
    llm::ScriptedClient mock(Json{{"rules", {rule("single", {fence(planted(kPy78, name))})}}});
    const RefineResult r = iterative_refine(x, "python", mock, oracle, 1, params(1));
    const EvalReport e = secure_ratio({x}, mock, oracle, 1, params(1));
    EXPECT_EQ(r.secure, e.aggregate_ratio == 0.0) << name;
  }
}

TEST(Refine, ClientFailureMidLoop) {
  const auto oracle = builtin();
  const Instruction x = task("refine task", kPy78);
  llm::ScriptedClient mock(Json{{"rules",
                                 {Json{{"contains", {"fix potential CWEs"}},
                                       {"responses", {"x"}},
                                       {"fail_first", 1000},
                                       {"status", 400}},
                                  rule("refine task", {fence(planted(kPy78, "03_vuln"))})}}});
  const RefineResult r = iterative_refine(x, "python", mock, oracle, 5, params(1));
  EXPECT_EQ(r.iters_used, 1);
  EXPECT_FALSE(r.secure);
  EXPECT_TRUE(r.error);
}

}  // namespace
}  // namespace forge::eval
