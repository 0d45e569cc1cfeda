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

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forge/catalog.hpp"
#include "forge/llm.hpp"
#include "forge/oracle/analyzer.hpp"

namespace forge::eval {

struct PairStats {
  int n_samples = 0;
  int n_vulnerable = 0;
  double ratio = 0;
};

struct SampleVerdict {
  std::string instruction_id;
  CwePair pair;
  std::string sample_id;
  int sample_index = 0;
  bool vulnerable = false;
  std::vector<std::string> rule_ids;
  std::string code;
};

struct EvalReport {
  std::map<CwePair, PairStats> per_pair;
  // Unweighted mean of the per-pair ratios.
  double aggregate_ratio = 0;
  // Vulnerable samples over all samples.
  double micro_ratio = 0;
  std::size_t instructions = 0;
  std::size_t failed_instructions = 0;
  std::vector<std::string> failures;
  std::vector<SampleVerdict> samples;  // by instruction id, then sample index
};

void to_json(Json& j, const PairStats& s);
void to_json(Json& j, const SampleVerdict& v);
// The report without its samples; those go to eval-samples.jsonl.
void to_json(Json& j, const EvalReport& r);

// Instructions must carry a pair. A client failure on one instruction leaves
// it out and is recorded in `failures`.
EvalReport secure_ratio(const std::vector<Instruction>& test_instrs, llm::TextClient& client,
                        const oracle::Oracle& oracle, int n_per_instr,
                        const llm::GenerationParams& params, int max_inflight = 1);

struct TriggerReport {
  std::map<CwePair, int> normal_counts;
  std::map<CwePair, int> induced_counts;
  int normal_total = 0;  // samples with at least one finding
  int induced_total = 0;
  int normal_samples = 0;
  int induced_samples = 0;
  // induced_total / normal_total; +inf when only the normal side is zero,
  // nullopt when both are.
  std::optional<double> ratio;
};

void to_json(Json& j, const TriggerReport& r);

// A normal instruction is sampled in its tagged language, else in the
// languages of the induced instructions composed from it, else in every
// language of the induced set.
TriggerReport trigger_comparison(const std::vector<Instruction>& normal,
                                 const std::vector<Instruction>& induced, llm::TextClient& client,
                                 const oracle::Oracle& oracle, int n,
                                 const llm::GenerationParams& params);

struct RefineResult {
  std::string final_code;
  int iters_used = 0;
  bool secure = false;
  std::optional<std::string> error;
};

void to_json(Json& j, const RefineResult& r);

// Generation counts as iteration 1; every fix request adds one. The fix at
// iteration t is drawn with sample index t - 2.
RefineResult iterative_refine(const Instruction& instr, std::string_view language,
                              llm::TextClient& client, const oracle::Oracle& oracle,
                              int max_iters, const llm::GenerationParams& params);

}  // namespace forge::eval
