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
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

#include "forge/bridge.hpp"
#include "forge/error.hpp"
#include "forge/objective.hpp"
#include "forge/pipeline.hpp"
#include "support/e2e.hpp"
#include "support/oracles.hpp"

namespace forge::pipeline {
namespace {

namespace fs = std::filesystem;

const fs::path kFixture = fs::path(FORGE_FIXTURES) / "e2e";
using forge::testing::read_json;

class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { names_ = forge::testing::code_names(kFixture); }

  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("forge_pipeline_" + std::to_string(::getpid()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  // A private copy of the fixture; each copy is an independent workspace.
  fs::path workspace(const std::string& name) {
    const fs::path dir = root_ / name;
    fs::copy(kFixture, dir, fs::copy_options::recursive);
    return dir;
  }

  static RunConfig config(const fs::path& ws) { return load_config(ws / "run.toml"); }
  static void run_all(const RunConfig& cfg) { forge::testing::run_all(cfg, names_); }
  static std::multiset<std::string> final_rows(const RunConfig& cfg, const std::string& source) {
    return forge::testing::final_rows(cfg, source, names_);
  }

  fs::path root_;
  static inline std::map<std::string, std::string> names_;
};

int run_cli(const std::string& args) {
  const int status = std::system((std::string(FORGE_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(Pipeline, HandEnumeratedDatasets) {
  const RunConfig cfg = config(workspace("a"));
  run_all(cfg);
  const fs::path dir = cfg.run_dir();

  const Json forge_manifest = read_json(dir / "forge-manifest.json");
  EXPECT_EQ(forge_manifest["totals"]["synthesized"], 2);
  EXPECT_EQ(forge_manifest["totals"]["parse_failures"], 1);
  EXPECT_EQ(read_jsonl(dir / "dsec.candidates.jsonl").size(), 6u);
  EXPECT_EQ(read_jsonl(dir / "dnorm.candidates.jsonl").size(), 8u);

  const Json filter = read_json(dir / "filter-report.json");
  EXPECT_EQ(filter["input"], 6);
  EXPECT_EQ(filter["kept"], 3);
  EXPECT_EQ(filter["dropped"], (Json{{"syntax", 0}, {"keyword", 1}, {"short", 1}, {"dedup", 1}}));

  const Json select = read_json(dir / "select-report.json");
  EXPECT_EQ(select["unlinked_candidates"], 4);
  EXPECT_EQ(select["after_top_k"], 3);
  EXPECT_EQ(select["discarded"], 1);
  EXPECT_EQ(select["orphans"], 1);

  EXPECT_EQ(final_rows(cfg, "sec"), forge::testing::expected_sec_rows());
  EXPECT_EQ(final_rows(cfg, "norm"), forge::testing::expected_norm_rows());
  const Json final_manifest = read_json(dir / "final.manifest.json");
  EXPECT_EQ(final_manifest["rows"], 5);
  EXPECT_DOUBLE_EQ(final_manifest["norm_fraction"].get<double>(), 0.4);

  const Json eval = read_json(dir / "eval-report.json");
  EXPECT_EQ(eval["aggregate_ratio"], 0.75);
  EXPECT_EQ(eval["per_pair"]["python/CWE-78"]["n_vulnerable"], 3);
  EXPECT_EQ(eval["refine"]["1"]["secure"], 0);
  EXPECT_EQ(eval["refine"]["1"]["mean_iters"], 1.0);
  EXPECT_EQ(eval["refine"]["3"]["secure"], 2);
  EXPECT_EQ(eval["refine"]["3"]["mean_iters"], 2.0);
  EXPECT_EQ(read_jsonl(dir / "eval-samples.jsonl").size(), 4u);

  // The loss report agrees with a direct evaluation of the exported pairs.
  const Json loss = read_json(dir / "loss-report.json");
  long double sum = 0;
  const auto pairs = objective::load_pairlogprobs(cfg.pairlogprobs);
  for (const auto& p : pairs) {
    sum += forge::testing::simpo_loss_oracle(p.logp_w, static_cast<double>(p.len_w), p.logp_l,
                                             static_cast<double>(p.len_l), 1.5, 0.5);
  }
  EXPECT_EQ(loss["loss"]["n"], 5);
  EXPECT_NEAR(loss["loss"]["mean"].get<double>(), static_cast<double>(sum / pairs.size()), 1e-12);

  const Json manifest = read_json(dir / "manifest.json");
  for (const auto& stage : all_stages()) {
    EXPECT_EQ(manifest["stages"][std::string(to_string(stage))]["status"], "complete") << to_string(stage);
  }
}

TEST_F(Pipeline, RunsAreByteIdentical) {
  const RunConfig a = config(workspace("a"));
  const RunConfig b = config(workspace("b"));
  run_all(a);
  run_all(b);
  for (const char* file : {"final.prefs.jsonl", "final.manifest.json", "manifest.json", "forge-manifest.json",
                           "dsec.star.jsonl", "dnorm.star.jsonl", "eval-report.json", "samples.jsonl"}) {
    EXPECT_EQ(read_text(a.run_dir() / file), read_text(b.run_dir() / file)) << file;
  }
}

TEST_F(Pipeline, RerunSkipsAndForceHitsCache) {
  const RunConfig cfg = config(workspace("a"));
  const StageOutcome first = run_stage(Stage::kSynth, cfg);
  EXPECT_FALSE(first.skipped);
  EXPECT_EQ(first.cache.hits, 0);
  EXPECT_GT(first.cache.misses, 0);
  const std::string before = read_text(cfg.run_dir() / "manifest.json");

  EXPECT_TRUE(run_stage(Stage::kSynth, cfg).skipped);
  EXPECT_EQ(read_text(cfg.run_dir() / "manifest.json"), before);

  const StageOutcome forced = run_stage(Stage::kSynth, cfg, StageOptions{true});
  EXPECT_FALSE(forced.skipped);
  EXPECT_EQ(forced.cache.misses, 0);
  EXPECT_EQ(forced.cache.hits, first.cache.misses);
  EXPECT_EQ(forced.cache.completion_tokens, 0);
}

TEST_F(Pipeline, StaleUpstreamIsRefused) {
  const fs::path ws = workspace("a");
  RunConfig cfg = config(ws);
  run_all(cfg);

  std::ofstream(cfg.run_dir() / "dsec.star.jsonl", std::ios::app) << "\n";
  try {
    run_stage(Stage::kFinalize, cfg);
    FAIL() << "expected StaleInputError";
  } catch (const StaleInputError& e) {
    EXPECT_EQ(e.stage(), "filter");
  }
  run_stage(Stage::kFilter, cfg, StageOptions{true});
  EXPECT_NO_THROW(run_stage(Stage::kFinalize, cfg));

  // A new seed changes the filter slice, so its outputs are out of date.
  cfg.seed = 9;
  refresh_canonical(cfg);
  EXPECT_THROW(run_stage(Stage::kFinalize, cfg), StaleInputError);
  // Changing the seeds file invalidates synth.
  RunConfig fresh = config(ws);
  std::ofstream(ws / "seeds.jsonl", std::ios::app) << R"({"text": "Write a tool that renames files."})" << "\n";
  try {
    run_stage(Stage::kBuildPrefs, fresh);
    FAIL();
  } catch (const StaleInputError& e) {
    EXPECT_EQ(e.stage(), "synth");
  }
}

TEST_F(Pipeline, MissingUpstreamIsStale) {
  const RunConfig cfg = config(workspace("a"));
  EXPECT_THROW(run_stage(Stage::kFilter, cfg), StaleInputError);
}

TEST_F(Pipeline, ConfigErrors) {
  const fs::path ws = workspace("a");
  EXPECT_THROW(parse_config("seed = \"x\"\n[client]\nkind = \"mock\"\nscript = \"m.json\"\n", ws), ConfigError);
  EXPECT_THROW(parse_config("[client]\nkind = \"carrier-pigeon\"\n", ws), ConfigError);
  EXPECT_THROW(parse_config("[influence]\ndiscard_quantile = 1.5\n[client]\nkind = \"mock\"\nscript = \"m\"\n", ws),
               ConfigError);
  EXPECT_THROW(parse_config("not toml [", ws), ConfigError);
  EXPECT_THROW(load_config(ws / "absent.toml"), ConfigError);
  // loss-report with no exported log-probs.
  const RunConfig cfg = config(ws);
  EXPECT_THROW(run_stage(Stage::kLossReport, cfg), ConfigError);
}

TEST_F(Pipeline, CliExitCodes) {
  const fs::path ws = workspace("a");
  const std::string conf = "--config " + (ws / "run.toml").string();
  EXPECT_EQ(run_cli("synth " + conf), 0);
  EXPECT_EQ(run_cli("synth " + conf), 0);
  EXPECT_EQ(run_cli("filter " + conf), 3);
  EXPECT_EQ(run_cli("loss-report " + conf), 2);
  EXPECT_EQ(run_cli("synth --config " + (ws / "absent.toml").string()), 2);
  EXPECT_EQ(run_cli("no-such-stage"), 2);
  EXPECT_EQ(run_cli("build-prefs " + conf + " --seed 9"), 3);
  EXPECT_EQ(run_cli("synth " + conf + " --force --max-inflight 1"), 0);
}

TEST_F(Pipeline, EvalSuiteFormats) {
  const fs::path ws = workspace("a");
  const auto suite = load_eval_suite(ws / "suite.jsonl");
  ASSERT_EQ(suite.size(), 2u);
  for (const auto& x : suite) {
    EXPECT_EQ(x.kind, InstructionKind::kVulnInducing);
    EXPECT_EQ(x.pair, make_cwe_pair("python", "CWE-78"));
  }
  std::ofstream(ws / "bad.jsonl") << R"({"text": "x", "language": "python"})" << "\n";
  EXPECT_THROW(load_eval_suite(ws / "bad.jsonl"), ValidationError);
}

}  // namespace
}  // namespace forge::pipeline

namespace forge::pipeline {
namespace {

// Published constants, checked against the reference document shipped with
// the sources, and the defaults that mirror them.
TEST(Defaults, MatchPublishedConstants) {
  const std::string doc = read_text(std::filesystem::path(FORGE_SOURCE_DIR) / "paper.md");
  for (const char* quote : {"beta=1.5, gamma=0.5", "top-2 influential", "least 20\\% influential", "1k steps",
                            "every 100 steps", "We select 38", "& 3 & 5 & 10"}) {
    EXPECT_NE(doc.find(quote), std::string::npos) << quote;
  }
  const RunConfig cfg;
  EXPECT_EQ(cfg.beta, 1.5);
  EXPECT_EQ(cfg.gamma, 0.5);
  EXPECT_EQ(cfg.top_k, 2);
  EXPECT_EQ(cfg.discard_quantile, 0.2);
  EXPECT_EQ(bridge::checkpoint_grid(bridge::Grid{}).size(), 10u);
}

}  // namespace
}  // namespace forge::pipeline
