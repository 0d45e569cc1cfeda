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

#include <iostream>

#include "CLI11.hpp"
#include "forge/error.hpp"
#include "forge/pipeline.hpp"

namespace {

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_inflight;
  bool force = false;
  std::string suite;
  std::optional<int> n;
  std::string model;
};

int run(forge::pipeline::Stage stage, const Args& args) {
  using namespace forge::pipeline;
  RunConfig cfg = load_config(args.config);
  if (args.seed) {
    cfg.seed = *args.seed;
    for (auto* p : {&cfg.synth.scenario_params, &cfg.synth.compose_params, &cfg.prefs.vuln_params,
                    &cfg.prefs.fix_params, &cfg.prefs.norm_params, &cfg.eval_params}) {
      p->seed = static_cast<std::int64_t>(cfg.seed);
    }
    cfg.synth.seed = cfg.seed;
  }
  if (args.max_inflight) {
    if (*args.max_inflight < 1) throw forge::ConfigError("--max-inflight must be >= 1");
    cfg.max_inflight = cfg.synth.max_inflight = cfg.prefs.max_inflight = *args.max_inflight;
  }
  if (!args.suite.empty()) cfg.eval_suite = std::filesystem::absolute(args.suite);
  if (args.n) cfg.eval_n = *args.n;
  if (!args.model.empty()) cfg.client = load_client_config(args.model);
  refresh_canonical(cfg);

  const auto outcome = run_stage(stage, cfg, StageOptions{args.force});
  forge::Json summary{{"stage", std::string(to_string(stage))},
                      {"run_dir", cfg.run_dir().string()},
                      {"skipped", outcome.skipped},
                      {"counts", outcome.counts}};
  std::cout << summary.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Security preference data pipeline"};
  app.set_version_flag("--version", forge::pipeline::kToolVersion);
  app.require_subcommand(1);
  Args args;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  std::vector<std::pair<CLI::App*, forge::pipeline::Stage>> subs;
  for (auto stage : forge::pipeline::all_stages()) {
    auto* sub = app.add_subcommand(std::string(forge::pipeline::to_string(stage)));
    sub->add_option("--config", args.config, "Run configuration (TOML)")->required();
    sub->add_option("--seed", args.seed, "Override the configured seed");
    sub->add_flag("--force", args.force, "Run even when upstream stages are stale");
    sub->add_option("--max-inflight", args.max_inflight, "Concurrent model calls");
    if (stage == forge::pipeline::Stage::kEval) {
      sub->add_option("--suite", args.suite, "Evaluation instructions (JSONL)");
      sub->add_option("--n", args.n, "Samples per instruction");
      sub->add_option("--model", args.model, "Client configuration (TOML)");
    }
    subs.emplace_back(sub, stage);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(forge::ExitCode::kValidation);
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  for (const auto& [sub, stage] : subs) {
    if (!sub->parsed()) continue;
    try {
      return run(stage, args);
    } catch (const forge::Error& e) {
      spdlog::error("{}", e.what());
      return static_cast<int>(e.code());
    } catch (const std::exception& e) {
      spdlog::error("{}", e.what());
      return static_cast<int>(forge::ExitCode::kFailure);
    }
  }
  return static_cast<int>(forge::ExitCode::kFailure);
}
