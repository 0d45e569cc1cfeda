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

#include "forge/bridge.hpp"

#include <map>
#include <set>

namespace forge::bridge {

std::vector<std::string> validate_pref_rows(const std::vector<Json>& rows,
                                            const std::optional<std::string>& only_source) {
  std::vector<std::string> problems;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Json& r = rows[i];
    const std::string where = "row " + std::to_string(i + 1);
    if (!r.is_object()) {
      problems.push_back(where + ": not an object");
      continue;
    }
    for (const char* key : {"id", "prompt", "chosen", "rejected", "source"}) {
      if (!r.contains(key) || !r[key].is_string()) {
        problems.push_back(where + ": missing string field '" + key + "'");
      }
    }
    if (!r.contains("links") || !r["links"].is_object()) {
      problems.push_back(where + ": missing links object");
    }
    if (r.contains("source") && r["source"].is_string()) {
      const auto source = r["source"].get<std::string>();
      if (source != "sec" && source != "norm") {
        problems.push_back(where + ": unknown source '" + source + "'");
      } else if (only_source && source != *only_source) {
        problems.push_back(where + ": source '" + source + "' where only '" + *only_source +
                           "' is allowed");
      }
    }
    if (r.contains("id") && r["id"].is_string() && !ids.insert(r["id"].get<std::string>()).second) {
      problems.push_back(where + ": duplicate id");
    }
  }
  return problems;
}

std::vector<Json> trace_subjects(const std::vector<prefs::NormTriple>& dnorm,
                                 const std::vector<prefs::SecTriple>& dsec,
                                 const prefs::SampleStore& samples,
                                 const prefs::InstructionStore& instructions) {
  std::map<std::string, const prefs::SecTriple*> sec;
  for (const auto& t : dsec) sec[t.id] = &t;
  auto text_of_sample = [&](const std::string& id) -> const std::string& {
    auto it = samples.find(id);
    if (it == samples.end()) throw ValidationError("unknown sample " + id);
    return it->second.text;
  };
  auto text_of_instr = [&](const std::string& id) -> const std::string& {
    auto it = instructions.find(id);
    if (it == instructions.end()) throw ValidationError("unknown instruction " + id);
    return it->second.text;
  };
  std::vector<Json> rows;
  for (const auto& n : dnorm) {
    auto s = sec.find(n.sec_link);
    if (s == sec.end()) continue;
    rows.push_back(Json{{"norm_id", n.id},
                        {"sec_id", n.sec_link},
                        {"x_n", text_of_instr(n.x_n)},
                        {"y_n", text_of_sample(n.y_n)},
                        {"y_f", text_of_sample(n.y_f)},
                        {"x_v", text_of_instr(s->second->x_v)}});
  }
  return rows;
}

std::vector<std::int64_t> checkpoint_grid(const Grid& grid) {
  if (grid.checkpoint_every <= 0 || grid.steps <= 0 || grid.steps % grid.checkpoint_every != 0) {
    throw ValidationError("checkpoint_every must divide steps");
  }
  std::vector<std::int64_t> out;
  for (std::int64_t s = grid.checkpoint_every; s <= grid.steps; s += grid.checkpoint_every) {
    out.push_back(s);
  }
  return out;
}

std::vector<std::string> validate_dynamics(const selector::TraceSet& traces,
                                           const std::vector<Json>& subjects,
                                           const std::optional<Grid>& grid) {
  using selector::TraceKind;
  std::vector<std::string> problems;
  if (grid && traces.size() > 0 && traces.grid() != checkpoint_grid(*grid)) {
    problems.push_back("step grid does not match the checkpoint schedule");
  }
  for (const auto& s : subjects) {
    const auto norm = s.at("norm_id").get<std::string>();
    const auto sec = s.at("sec_id").get<std::string>();
    if (!traces.find(norm, TraceKind::kXnYn)) problems.push_back(norm + ": no r_xn_yn trace");
    if (!traces.find(norm, TraceKind::kXnYf)) problems.push_back(norm + ": no r_xn_yf trace");
    if (!traces.find(sec, TraceKind::kXvYf) && !traces.find(norm, TraceKind::kXvYf)) {
      problems.push_back(norm + ": no r_xv_yf trace");
    }
  }
  return problems;
}

std::vector<std::string> validate_pairlogprobs(const std::vector<objective::PairLogProb>& pairs,
                                               const std::vector<Json>& pref_rows) {
  std::vector<std::string> problems;
  std::map<std::string, int> seen;
  for (const auto& p : pairs) {
    if (++seen[p.row_id] > 1) problems.push_back(p.row_id + ": duplicate row");
    if (p.len_w <= 0 || p.len_l <= 0) problems.push_back(p.row_id + ": non-positive length");
  }
  for (const auto& r : pref_rows) {
    const auto id = r.at("id").get<std::string>();
    if (!seen.count(id)) problems.push_back(id + ": no log-prob row");
  }
  if (pairs.size() != pref_rows.size()) {
    problems.push_back("row count " + std::to_string(pairs.size()) + " differs from dataset " +
                       std::to_string(pref_rows.size()));
  }
  return problems;
}

}  // namespace forge::bridge
