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

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "forge/eval.hpp"
#include "forge/prefs.hpp"

namespace forge::eval {

void to_json(Json& j, const PairStats& s) {
  j = Json{{"n_samples", s.n_samples}, {"n_vulnerable", s.n_vulnerable}, {"ratio", s.ratio}};
}

void to_json(Json& j, const SampleVerdict& v) {
  j = Json{{"instruction_id", v.instruction_id},
           {"pair", v.pair},
           {"sample_id", v.sample_id},
           {"sample_index", v.sample_index},
           {"vulnerable", v.vulnerable},
           {"rule_ids", v.rule_ids},
           {"code", v.code}};
}

void to_json(Json& j, const EvalReport& r) {
  Json per = Json::object();
  for (const auto& [pair, stats] : r.per_pair) per[pair.key()] = stats;
  j = Json{{"per_pair", per},
           {"aggregate_ratio", r.aggregate_ratio},
           {"micro_ratio", r.micro_ratio},
           {"coverage", {{"instructions", r.instructions},
                         {"failed", r.failed_instructions},
                         {"failures", r.failures}}},
           {"utility", nullptr}};
}

namespace {

std::vector<std::string> rule_ids(const oracle::AnalysisReport& report) {
  std::vector<std::string> ids;
  for (const auto& f : report.findings) ids.push_back(f.rule_id);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

}  // namespace

EvalReport secure_ratio(const std::vector<Instruction>& test_instrs, llm::TextClient& client,
                        const oracle::Oracle& oracle, int n_per_instr,
                        const llm::GenerationParams& params, int max_inflight) {
  if (n_per_instr < 1) throw ValidationError("samples per instruction must be >= 1");
  std::vector<Instruction> sorted = test_instrs;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const auto& i : sorted) {
    if (!i.pair) throw ValidationError("eval instruction " + i.id + " has no (language, CWE) pair");
  }

  struct Unit {
    std::vector<SampleVerdict> verdicts;
    std::optional<std::string> failure;
  };
  auto units = llm::parallel_map<Unit>(sorted.size(), max_inflight, [&](std::size_t k) {
    const Instruction& instr = sorted[k];
    Unit u;
    try {
      auto samples = prefs::sample_responses(instr, instr.pair->language, n_per_instr, params,
                                             client);
      for (const auto& s : samples) {
        const auto report = oracle.analyze(s.text, s.language);
        u.verdicts.push_back(SampleVerdict{instr.id, *instr.pair, s.id, s.sample_index,
                                           !oracle::is_secure(report), rule_ids(report), s.text});
      }
    } catch (const StageError& e) {
      u.failure = instr.id + ": " + e.what();
      u.verdicts.clear();
    }
    return u;
  });

  EvalReport r;
  r.instructions = sorted.size();
  long total = 0;
  long vulnerable = 0;
  for (auto& u : units) {
    if (u.failure) {
      ++r.failed_instructions;
      r.failures.push_back(*u.failure);
      spdlog::warn("eval: {}", *u.failure);
    }
    for (auto& v : u.verdicts) {
      auto& stats = r.per_pair[v.pair];
      ++stats.n_samples;
      ++total;
      if (v.vulnerable) {
        ++stats.n_vulnerable;
        ++vulnerable;
      }
      r.samples.push_back(std::move(v));
    }
  }
  double sum = 0;
  for (auto& [pair, stats] : r.per_pair) {
    stats.ratio = static_cast<double>(stats.n_vulnerable) / static_cast<double>(stats.n_samples);
    sum += stats.ratio;
  }
  if (!r.per_pair.empty()) r.aggregate_ratio = sum / static_cast<double>(r.per_pair.size());
  if (total > 0) r.micro_ratio = static_cast<double>(vulnerable) / static_cast<double>(total);
  return r;
}

void to_json(Json& j, const TriggerReport& r) {
  Json normal = Json::object();
  for (const auto& [pair, n] : r.normal_counts) normal[pair.key()] = n;
  Json induced = Json::object();
  for (const auto& [pair, n] : r.induced_counts) induced[pair.key()] = n;
  Json ratio = nullptr;
  if (r.ratio) {
    ratio = std::isinf(*r.ratio) ? Json("inf") : Json(*r.ratio);
  }
  j = Json{{"normal", {{"per_pair", normal}, {"vulnerable", r.normal_total},
                       {"samples", r.normal_samples}}},
           {"induced", {{"per_pair", induced}, {"vulnerable", r.induced_total},
                        {"samples", r.induced_samples}}},
           {"ratio", ratio}};
}

TriggerReport trigger_comparison(const std::vector<Instruction>& normal,
                                 const std::vector<Instruction>& induced, llm::TextClient& client,
                                 const oracle::Oracle& oracle, int n,
                                 const llm::GenerationParams& params) {
  if (normal.empty() || induced.empty()) {
    throw ValidationError("trigger comparison needs both instruction sets");
  }
  std::set<std::string> all_languages;
  std::map<std::string, std::set<std::string>> composed_languages;
  for (const auto& x : induced) {
    if (!x.pair) throw ValidationError("induced instruction " + x.id + " has no pair");
    all_languages.insert(x.pair->language);
    if (x.origin_id) composed_languages[*x.origin_id].insert(x.pair->language);
  }

  TriggerReport r;
  auto tally = [&](const Instruction& instr, const std::string& language,
                   std::map<CwePair, int>& counts, int& flagged, int& samples) {
    for (const auto& s : prefs::sample_responses(instr, language, n, params, client)) {
      ++samples;
      const auto report = oracle.analyze(s.text, s.language);
      if (oracle::is_secure(report)) continue;
      ++flagged;
      std::set<CwePair> pairs;
      for (const auto& f : report.findings) pairs.insert(f.pair);
      for (const auto& p : pairs) ++counts[p];
    }
  };

  for (const auto& x : induced) {
    tally(x, x.pair->language, r.induced_counts, r.induced_total, r.induced_samples);
  }
  for (const auto& x : normal) {
    std::set<std::string> langs;
    if (x.language) {
      langs.insert(normalize_language(*x.language));
    } else if (auto it = composed_languages.find(x.id); it != composed_languages.end()) {
      langs = it->second;
    } else {
      langs = all_languages;
    }
    for (const auto& lang : langs) {
      tally(x, lang, r.normal_counts, r.normal_total, r.normal_samples);
    }
  }
  if (r.normal_total > 0) {
    r.ratio = static_cast<double>(r.induced_total) / static_cast<double>(r.normal_total);
  } else if (r.induced_total > 0) {
    r.ratio = std::numeric_limits<double>::infinity();
  }
  return r;
}

void to_json(Json& j, const RefineResult& r) {
  j = Json{{"final_code", r.final_code},
           {"iters_used", r.iters_used},
           {"secure", r.secure},
           {"error", r.error ? Json(*r.error) : Json(nullptr)}};
}

RefineResult iterative_refine(const Instruction& instr, std::string_view language,
                              llm::TextClient& client, const oracle::Oracle& oracle,
                              int max_iters, const llm::GenerationParams& params) {
  if (max_iters < 1) throw ValidationError("max_iters must be >= 1");
  RefineResult r;
  prefs::CodeSample current;
  current.instruction_id = instr.id;
  current.language = std::string(language);
  current.gen = params;
  try {
    for (int iter = 1; iter <= max_iters; ++iter) {
      std::string completion;
      if (iter == 1) {
        completion = client.complete(prefs::response_prompt(instr, language), params, 0).text;
      } else {
        completion = client.complete(prefs::fix_prompt(instr, current), params, iter - 2).text;
      }
      auto code = prefs::extract_code_block(completion);
      current.text = code ? *code : completion;
      current.sample_index = iter - 1;
      current.report = oracle.analyze(current.text, language);
      r.iters_used = iter;
      r.final_code = current.text;
      if (oracle::is_secure(*current.report)) {
        r.secure = true;
        return r;
      }
    }
  } catch (const ClientError& e) {
    r.error = e.what();
  }
  return r;
}

}  // namespace forge::eval
