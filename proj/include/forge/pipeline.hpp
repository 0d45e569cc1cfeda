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
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "forge/eval.hpp"
#include "forge/llm.hpp"
#include "forge/oracle/analyzer.hpp"
#include "forge/prefs.hpp"
#include "forge/selector.hpp"
#include "forge/synth.hpp"

namespace forge::pipeline {

inline constexpr const char* kToolVersion = "forge 0.1.0";

enum class Stage { kSynth, kBuildPrefs, kFilter, kInfluence, kFinalize, kEval, kLossReport };

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view s);
const std::vector<Stage>& all_stages();

struct ClientConfig {
  std::string kind = "mock";  // "mock" | "http"
  std::filesystem::path script;
  std::string model = "mock";
  int retries = 3;
  int base_delay_ms = 500;
};

struct OracleConfig {
  std::string kind = "builtin";  // "builtin" | "external"
  std::filesystem::path rules_dir;
  std::string command;
  std::vector<std::string> known_cwes;
};

struct RunConfig {
  std::filesystem::path config_dir;
  std::string run_id;
  std::filesystem::path run_root = "runs";
  std::uint64_t seed = 0;
  int max_inflight = 4;

  ClientConfig client;
  std::optional<ClientConfig> synth_client;

  std::filesystem::path targets;
  std::filesystem::path seeds;
  std::filesystem::path dynamics;
  std::filesystem::path pairlogprobs;
  std::filesystem::path eval_suite;

  OracleConfig oracle;
  synth::SynthOptions synth;
  int embedding_dim = 256;
  prefs::BuildOptions prefs;
  selector::FilterThresholds filter;

  selector::Measure measure = selector::Measure::kDefault;
  int top_k = 2;
  double discard_quantile = 0.2;
  std::optional<double> dnorm_ratio;

  double beta = 1.5;
  double gamma = 0.5;

  int eval_n = 10;
  llm::GenerationParams eval_params{0.8, 1.0, 2048, 1, 0};
  std::vector<int> refine_budgets;
  bool trigger = false;

  // Canonical JSON of everything above; hashed into the manifest.
  Json canonical;

  std::filesystem::path run_dir() const { return run_root / run_id; }
};

// Relative paths resolve against the config file's directory. Throws
// ConfigError.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::string_view toml_text, const std::filesystem::path& config_dir);

// Rebuilds `canonical` after fields were changed in code (CLI overrides).
void refresh_canonical(RunConfig& cfg);

// Client configuration from a standalone TOML file holding a [client] table.
ClientConfig load_client_config(const std::filesystem::path& path);

struct StageState {
  std::string status;  // "complete" | "failed"
  std::string config_hash;
  std::map<std::string, std::string> input_hashes;
  std::map<std::string, std::string> output_hashes;
  Json counts = Json::object();
};

struct RunManifest {
  std::string run_id;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string tool_version = kToolVersion;
  std::map<std::string, StageState> stages;

  static RunManifest load_or_init(const std::filesystem::path& run_dir, const RunConfig& cfg);
  void save(const std::filesystem::path& run_dir) const;
};

void to_json(Json& j, const StageState& s);
void from_json(const Json& j, StageState& s);
void to_json(Json& j, const RunManifest& m);

struct StageOptions {
  bool force = false;
};

struct StageOutcome {
  Stage stage = Stage::kSynth;
  bool skipped = false;  // already complete with unchanged inputs
  Json counts = Json::object();
  llm::CacheStats cache;
};

// Runs one stage against the run directory. Throws StaleInputError when an
// upstream stage is missing or its outputs changed since it completed.
StageOutcome run_stage(Stage stage, const RunConfig& cfg, const StageOptions& options = {});

// Instruction suite for evaluation: Instruction records, or rows with
// {text, language, cwe}.
std::vector<Instruction> load_eval_suite(const std::filesystem::path& path);

}  // namespace forge::pipeline
