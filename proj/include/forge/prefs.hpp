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
#include <string_view>
#include <utility>
#include <vector>

#include "forge/catalog.hpp"
#include "forge/llm.hpp"
#include "forge/oracle/analyzer.hpp"

namespace forge::prefs {

struct CodeSample {
  std::string id;
  std::string instruction_id;
  std::string text;
  std::string language;
  llm::GenerationParams gen;
  int sample_index = 0;
  // Vulnerable sample this one was produced to fix.
  std::optional<std::string> fix_of;
  std::optional<oracle::AnalysisReport> report;
};

std::string sample_id(std::string_view instruction_id, std::string_view text, std::int64_t seed,
                      int sample_index);

struct SecTriple {
  std::string id;
  std::string x_v;
  std::string y_f;
  std::string y_v;
  CwePair pair;
  std::vector<std::string> findings_fixed;

  friend bool operator==(const SecTriple&, const SecTriple&) = default;
};

struct NormTriple {
  std::string id;
  std::string x_n;
  std::string y_n;
  std::string y_f;
  std::string sec_link;

  friend bool operator==(const NormTriple&, const NormTriple&) = default;
};

std::string sec_triple_id(std::string_view x_v, std::string_view y_f, std::string_view y_v);
std::string norm_triple_id(std::string_view x_n, std::string_view y_n, std::string_view y_f,
                           std::string_view sec_link);

using SampleStore = std::map<std::string, CodeSample>;
using InstructionStore = std::map<std::string, Instruction>;

void to_json(Json& j, const CodeSample& s);
void from_json(const Json& j, CodeSample& s);
void to_json(Json& j, const SecTriple& t);
void from_json(const Json& j, SecTriple& t);
void to_json(Json& j, const NormTriple& t);
void from_json(const Json& j, NormTriple& t);

// Body of the first fenced code block, or nullopt when there is none.
std::optional<std::string> extract_code_block(std::string_view completion);

// What the target model is asked for an instruction.
std::string response_prompt(const Instruction& instr, std::string_view language);
std::string fix_prompt(const Instruction& x_v, const CodeSample& y_v);
// One line per finding: "- <rule> <CWE> (line N): <message>".
std::string analyzer_feedback(const oracle::AnalysisReport& report);

std::vector<CodeSample> sample_responses(const Instruction& instr, std::string_view language,
                                         int n, const llm::GenerationParams& params,
                                         llm::TextClient& client);

struct Partition {
  std::vector<CodeSample> vulnerable;
  std::vector<CodeSample> clean;
  std::size_t invalid = 0;
};

Partition partition_by_security(std::vector<CodeSample> samples, const oracle::Oracle& oracle);

// Secure, syntax-valid fixes of `y_v`.
std::vector<CodeSample> request_fix(const Instruction& x_v, const CodeSample& y_v,
                                    const llm::GenerationParams& params,
                                    llm::TextClient& client, const oracle::Oracle& oracle);

struct BuildOptions {
  llm::GenerationParams vuln_params{0.8, 1.0, 2048, 16, 0};
  llm::GenerationParams fix_params{0.8, 1.0, 2048, 8, 0};
  llm::GenerationParams norm_params{0.8, 1.0, 2048, 8, 0};
  int max_pairs_per_instruction = 4;
  int max_norm_per_sec = 8;
  bool allow_clean_as_win = false;
  int max_inflight = 4;
};

struct BuildCounts {
  std::size_t instructions = 0;
  std::size_t samples = 0;
  std::size_t invalid = 0;
  std::size_t vulnerable = 0;
  std::size_t fix_requests = 0;
  std::size_t fixes_retained = 0;
  std::size_t no_secure_fix = 0;
  std::size_t sec_triples = 0;
  std::size_t norm_links_empty = 0;
  std::size_t norm_triples = 0;
};

void to_json(Json& j, const BuildCounts& c);

struct SecBuild {
  std::vector<SecTriple> triples;  // sorted by id
  SampleStore samples;
  BuildCounts counts;
};

SecBuild build_sec(const std::vector<Instruction>& instrs, const oracle::Oracle& oracle,
                   llm::TextClient& client, const BuildOptions& options);

struct NormBuild {
  std::vector<NormTriple> triples;  // sorted by id
  SampleStore samples;
  BuildCounts counts;
};

// `instructions` must resolve every x_v and its origin. Throws
// ValidationError listing the SecTriples whose origin is missing.
NormBuild build_norm(const std::vector<SecTriple>& sec, const InstructionStore& instructions,
                     const oracle::Oracle& oracle, llm::TextClient& client,
                     const BuildOptions& options);

}  // namespace forge::prefs
