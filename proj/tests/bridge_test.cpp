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

#include "forge/bridge.hpp"
#include "forge/error.hpp"

namespace forge::bridge {
namespace {

using selector::TraceKind;

TEST(CheckpointGrid, Schedules) {
  EXPECT_EQ(checkpoint_grid({1000, 100}).size(), 10u);
  EXPECT_EQ(checkpoint_grid({1000, 100}).front(), 100);
  EXPECT_EQ(checkpoint_grid({1000, 100}).back(), 1000);
  EXPECT_EQ(checkpoint_grid({10, 5}), (std::vector<std::int64_t>{5, 10}));
  EXPECT_THROW(checkpoint_grid({10, 3}), ValidationError);
  EXPECT_THROW(checkpoint_grid({10, 0}), ValidationError);
}

std::vector<Json> subjects(int n) {
  std::vector<Json> out;
  for (int i = 0; i < n; ++i) {
    const std::string k = std::to_string(i);
    out.push_back(Json{{"norm_id", "n" + k}, {"sec_id", "s" + k}, {"x_n", "x"}, {"y_n", "y"}, {"y_f", "f"},
                       {"x_v", "v"}});
  }
  return out;
}

// What a trainer would write for `subs` on `grid`.
std::vector<Json> dynamics_rows(const std::vector<Json>& subs, const Grid& grid) {
  std::vector<Json> rows;
  for (std::int64_t step : checkpoint_grid(grid)) {
    for (const auto& s : subs) {
      rows.push_back(Json{{"subject_id", s["norm_id"]}, {"kind", "r_xn_yn"}, {"step", step}, {"value", -1.0}});
      rows.push_back(Json{{"subject_id", s["norm_id"]}, {"kind", "r_xn_yf"}, {"step", step}, {"value", -2.0}});
      rows.push_back(Json{{"subject_id", s["sec_id"]}, {"kind", "r_xv_yf"}, {"step", step}, {"value", -0.5}});
    }
  }
  return rows;
}

TEST(Dynamics, WellFormedExportValidates) {
  const auto subs = subjects(3);
  const Grid grid{10, 5};
  const auto rows = dynamics_rows(subs, grid);
  EXPECT_EQ(rows.size(), 18u);
  const auto traces = selector::TraceSet::from_rows(rows);
  EXPECT_TRUE(validate_dynamics(traces, subs, grid).empty());
  EXPECT_TRUE(validate_dynamics(traces, subs).empty());
  EXPECT_FALSE(validate_dynamics(traces, subs, Grid{20, 5}).empty());
}

TEST(Dynamics, MissingKindsReported) {
  const auto subs = subjects(2);
  auto rows = dynamics_rows(subs, Grid{10, 5});
  std::erase_if(rows, [](const Json& r) { return r["subject_id"] == "n1" && r["kind"] == "r_xn_yf"; });
  std::erase_if(rows, [](const Json& r) { return r["subject_id"] == "s0"; });
  const auto problems = validate_dynamics(selector::TraceSet::from_rows(rows), subs);
  ASSERT_EQ(problems.size(), 2u);
  EXPECT_EQ(problems[0], "n0: no r_xv_yf trace");
  EXPECT_EQ(problems[1], "n1: no r_xn_yf trace");
}

Json sec_row(const std::string& id) {
  return Json{{"id", id}, {"prompt", "p"}, {"chosen", "c"}, {"rejected", "r"}, {"source", "sec"},
              {"links", Json::object()}};
}

TEST(PrefRows, SecOnlySchema) {
  std::vector<Json> rows{sec_row("a"), sec_row("b")};
  EXPECT_TRUE(validate_pref_rows(rows, std::string("sec")).empty());
  rows.push_back(sec_row("c"));
  rows.back()["source"] = "norm";
  EXPECT_TRUE(validate_pref_rows(rows).empty());
  EXPECT_EQ(validate_pref_rows(rows, std::string("sec")).size(), 1u);
  rows.push_back(sec_row("a"));
  rows.push_back(Json{{"id", "d"}, {"source", "other"}});
  const auto problems = validate_pref_rows(rows);
  // duplicate id, three missing strings, missing links, unknown source
  EXPECT_EQ(problems.size(), 6u);
}

TEST(TraceSubjects, CarryTextsAndSkipUnlinked) {
  const auto pair = make_cwe_pair("python", "CWE-78");
  const Instruction x_n = make_normal_instruction("normal text");
  const Instruction x_v = make_vuln_instruction("induced text", pair, x_n);
  prefs::InstructionStore instrs{{x_n.id, x_n}, {x_v.id, x_v}};
  prefs::SampleStore samples;
  for (const std::string id : {"yv", "yf", "yn"}) samples[id] = prefs::CodeSample{id, "", id + " code"};
  prefs::SecTriple sec{"sec1", x_v.id, "yf", "yv", pair, {}};
  prefs::NormTriple linked{"norm1", x_n.id, "yn", "yf", "sec1"};
  prefs::NormTriple orphan{"norm2", x_n.id, "yn", "yf", "filtered"};
  const auto rows = trace_subjects({linked, orphan}, {sec}, samples, instrs);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], (Json{{"norm_id", "norm1"}, {"sec_id", "sec1"}, {"x_n", "normal text"}, {"y_n", "yn code"},
                           {"y_f", "yf code"}, {"x_v", "induced text"}}));
  prefs::NormTriple dangling{"norm3", x_n.id, "missing", "yf", "sec1"};
  EXPECT_THROW(trace_subjects({dangling}, {sec}, samples, instrs), ValidationError);
}

TEST(PairLogProbs, OneRowPerPreference) {
  const std::vector<Json> prefs{sec_row("a"), sec_row("b")};
  std::vector<objective::PairLogProb> pairs{{"a", -1, 2, -1, 2}, {"b", -3, 4, -2, 1}};
  EXPECT_TRUE(validate_pairlogprobs(pairs, prefs).empty());
  // Degenerate row: chosen == rejected gives ln 2 with no margin.
  EXPECT_NEAR(objective::simpo_loss(pairs[0], 1.5, 0.0), std::log(2.0), 1e-12);
  pairs.pop_back();
  EXPECT_EQ(validate_pairlogprobs(pairs, prefs).size(), 2u);
  pairs.push_back({"a", -1, 0, -1, 2});
  EXPECT_EQ(validate_pairlogprobs(pairs, prefs).size(), 3u);
  EXPECT_TRUE(validate_pairlogprobs({}, {}).empty());
}

}  // namespace
}  // namespace forge::bridge
