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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/catalog.hpp"
#include "forge/embed.hpp"
#include "forge/llm.hpp"

namespace forge::synth {

// Prompt templates, filled by literal `[[Name]]` substitution.
std::string_view prompt_template(std::string_view name);  // "scenarios", "compose", "fix"
std::string fill_template(std::string_view tmpl,
                          const std::map<std::string, std::string>& values);

// Display name used in prompts ("Python", "JavaScript", ...).
std::string language_display(std::string_view language);

std::string scenario_prompt(const CwePair& pair);
std::string compose_prompt(const Instruction& x_n, const ScenarioRecord& scenario,
                           const CwePair& pair);

std::vector<ScenarioRecord> query_cwe_scenarios(const CwePair& pair,
                                                const llm::GenerationParams& params,
                                                llm::TextClient& client);

struct RelevanceOptions {
  std::size_t cap = 2000;  // 0 keeps everything
  std::vector<std::string> keywords;
};

// Language-tagged seeds of the pair's language plus untagged seeds, narrowed
// by the keyword allowlist when given, capped in hash order. Sorted by id.
std::vector<Instruction> relevant_instructions(const std::vector<Instruction>& seeds,
                                               const CwePair& pair,
                                               const RelevanceOptions& options = {});

class ComposeParseError : public Error {
 public:
  using Error::Error;
};

// Last top-level JSON object in `completion` with a string "task" key.
std::optional<std::string> extract_task(std::string_view completion);

Instruction compose(const Instruction& x_n, const ScenarioRecord& scenario, const CwePair& pair,
                    const llm::GenerationParams& params, llm::TextClient& client,
                    int sample_index = 0);

struct ClusterOptions {
  int max_iters = 50;
  double tolerance = 1e-6;
};

// K-means (k-means++ seeding) over embeddings; one member per cluster, the
// one nearest its centre. Output sorted by id.
std::vector<Instruction> cluster_select(const std::vector<Instruction>& instructions, int k,
                                        const Embedder& embedder, std::uint64_t seed,
                                        const ClusterOptions& options = {});

// Same on raw points (columns); returns chosen column indices, ascending.
std::vector<std::size_t> kmeans_representatives(const Eigen::MatrixXd& points, int k,
                                                std::uint64_t seed,
                                                const ClusterOptions& options = {});

// Mean pairwise cosine similarity.
double diversity_score(const std::vector<Instruction>& instructions, const Embedder& embedder);
double mean_pairwise_cosine(const Eigen::MatrixXd& points);

struct SynthOptions {
  llm::GenerationParams scenario_params{1.0, 1.0, 1024, 4, 0};
  llm::GenerationParams compose_params{0.8, 1.0, 1024, 1, 0};
  RelevanceOptions relevance;
  int k = 2000;
  std::uint64_t seed = 0;
  int max_inflight = 4;
};

struct SynthCounts {
  std::size_t scenarios = 0;
  std::size_t relevant = 0;
  std::size_t synthesized = 0;
  std::size_t parse_failures = 0;
  std::size_t clustered = 0;
};

struct SynthResult {
  std::vector<ScenarioRecord> scenarios;
  std::vector<Instruction> instructions;  // after clustering
  SynthCounts counts;
};

// One pair end to end. Each relevant seed is composed with one scenario,
// picked by hashing the seed id.
SynthResult synthesize_pair(const CwePair& pair, const std::vector<Instruction>& seeds,
                            const SynthOptions& options, llm::TextClient& client,
                            const Embedder& embedder);

}  // namespace forge::synth
