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
#include <functional>
#include <set>

#include "forge/bridge.hpp"
#include "forge/embed.hpp"
#include "forge/error.hpp"
#include "forge/objective.hpp"
#include "forge/pipeline.hpp"

namespace forge::pipeline {

namespace fs = std::filesystem;

namespace {

const std::vector<std::pair<Stage, std::string_view>> kStageNames = {
    {Stage::kSynth, "synth"},         {Stage::kBuildPrefs, "build-prefs"},
    {Stage::kFilter, "filter"},       {Stage::kInfluence, "influence"},
    {Stage::kFinalize, "finalize"},   {Stage::kEval, "eval"},
    {Stage::kLossReport, "loss-report"}};

}  // namespace

std::string_view to_string(Stage s) {
  for (const auto& [stage, name] : kStageNames) {
    if (stage == s) return name;
  }
  return "?";
}

Stage parse_stage(std::string_view s) {
  for (const auto& [stage, name] : kStageNames) {
    if (name == s) return stage;
  }
  throw ValidationError("unknown stage '" + std::string(s) + "'");
}

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> stages = [] {
    std::vector<Stage> out;
    for (const auto& [stage, name] : kStageNames) out.push_back(stage);
    return out;
  }();
  return stages;
}

void to_json(Json& j, const StageState& s) {
  j = Json{{"status", s.status},
           {"config_hash", s.config_hash},
           {"input_hashes", s.input_hashes},
           {"output_hashes", s.output_hashes},
           {"counts", s.counts}};
}

void from_json(const Json& j, StageState& s) {
  s.status = j.at("status").get<std::string>();
  s.config_hash = j.value("config_hash", "");
  s.input_hashes = j.value("input_hashes", std::map<std::string, std::string>{});
  s.output_hashes = j.value("output_hashes", std::map<std::string, std::string>{});
  s.counts = j.value("counts", Json::object());
}

void to_json(Json& j, const RunManifest& m) {
  Json stages = Json::object();
  for (const auto& [name, state] : m.stages) stages[name] = state;
  j = Json{{"run_id", m.run_id},
           {"seed", m.seed},
           {"config_hash", m.config_hash},
           {"tool_version", m.tool_version},
           {"stages", stages}};
}

RunManifest RunManifest::load_or_init(const fs::path& run_dir, const RunConfig& cfg) {
  RunManifest m;
  const auto path = run_dir / "manifest.json";
  if (fs::exists(path)) {
    Json j;
    try {
      j = Json::parse(read_text(path));
    } catch (const Json::exception& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
    if (j.value("run_id", "") != cfg.run_id) {
      throw ValidationError(path.string() + " belongs to run " + j.value("run_id", "?"));
    }
    const Json stages = j.value("stages", Json::object());
    for (const auto& [name, state] : stages.items()) {
      m.stages[name] = state.get<StageState>();
    }
  }
  m.run_id = cfg.run_id;
  m.seed = cfg.seed;
  m.config_hash = content_hash(cfg.canonical);
  return m;
}

void RunManifest::save(const fs::path& run_dir) const {
  write_json_atomic(run_dir / "manifest.json", Json(*this));
}

std::vector<Instruction> load_eval_suite(const fs::path& path) {
  std::vector<Instruction> out;
  std::size_t line = 0;
  for (const auto& row : read_jsonl(path)) {
    ++line;
    const std::string where = path.string() + ":" + std::to_string(line);
    try {
      if (row.contains("kind")) {
        out.push_back(row.get<Instruction>());
        if (!out.back().pair) throw ValidationError("instruction has no (language, CWE) pair");
        continue;
      }
      auto text = row.at("text").get<std::string>();
      auto pair = make_cwe_pair(row.at("language").get<std::string>(), row.at("cwe").get<std::string>());
      Instruction i;
      i.kind = InstructionKind::kVulnInducing;
      i.id = instruction_id(i.kind, text, pair, std::nullopt);
      i.text = std::move(text);
      i.pair = std::move(pair);
      out.push_back(std::move(i));
    } catch (const Json::exception& e) {
      throw ValidationError(where + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const auto& a, const auto& b) { return a.id == b.id; }),
            out.end());
  return out;
}

namespace {

// A file another stage produced, or an external input named by the config.
struct Input {
  std::string key;
  fs::path path;
  std::optional<Stage> from;
};

std::vector<Input> stage_inputs(Stage stage, const RunConfig& cfg) {
  const fs::path dir = cfg.run_dir();
  auto up = [&](Stage s, const std::string& file) {
    return Input{std::string(to_string(s)) + "/" + file, dir / file, s};
  };
  auto ext = [&](const std::string& name, const fs::path& p) {
    if (p.empty()) throw ConfigError("inputs." + name + " is required for " + std::string(to_string(stage)));
    if (!fs::exists(p)) throw ConfigError("inputs." + name + ": no file " + p.string());
    return Input{"input/" + name, p, std::nullopt};
  };
  switch (stage) {
    case Stage::kSynth:
      return {ext("targets", cfg.targets), ext("seeds", cfg.seeds)};
    case Stage::kBuildPrefs:
      return {up(Stage::kSynth, "instructions.jsonl"), up(Stage::kSynth, "normals.jsonl")};
    case Stage::kFilter:
      return {up(Stage::kSynth, "instructions.jsonl"), up(Stage::kSynth, "normals.jsonl"),
              up(Stage::kBuildPrefs, "samples.jsonl"), up(Stage::kBuildPrefs, "dsec.candidates.jsonl"),
              up(Stage::kBuildPrefs, "dnorm.candidates.jsonl")};
    case Stage::kInfluence:
      return {up(Stage::kBuildPrefs, "dnorm.candidates.jsonl"), up(Stage::kFilter, "dsec.star.jsonl"),
              up(Stage::kFilter, "trace-subjects.jsonl"), ext("dynamics", cfg.dynamics)};
    case Stage::kFinalize:
      return {up(Stage::kSynth, "instructions.jsonl"), up(Stage::kSynth, "normals.jsonl"),
              up(Stage::kBuildPrefs, "samples.jsonl"), up(Stage::kFilter, "dsec.star.jsonl"),
              up(Stage::kInfluence, "dnorm.star.jsonl")};
    case Stage::kEval: {
      std::vector<Input> in{ext("eval_suite", cfg.eval_suite)};
      if (cfg.trigger) {
        in.push_back(up(Stage::kSynth, "instructions.jsonl"));
        in.push_back(up(Stage::kSynth, "normals.jsonl"));
      }
      return in;
    }
    case Stage::kLossReport:
      return {ext("pairlogprobs", cfg.pairlogprobs)};
  }
  return {};
}

// Slice of the canonical config a stage's outputs depend on.
Json stage_config(Stage stage, const RunConfig& cfg) {
  const Json& c = cfg.canonical;
  const Json& synth_client = c.contains("synth_client") ? c["synth_client"] : c["client"];
  switch (stage) {
    case Stage::kSynth:
      return Json{{"seed", c["seed"]}, {"client", synth_client}, {"synth", c["synth"]}};
    case Stage::kBuildPrefs:
      return Json{{"seed", c["seed"]}, {"client", c["client"]}, {"oracle", c["oracle"]},
                  {"prefs", c["prefs"]}};
    case Stage::kFilter:
      return Json{{"seed", c["seed"]}, {"filter", c["filter"]}};
    case Stage::kInfluence:
      return Json{{"influence", c["influence"]}};
    case Stage::kFinalize:
      return Json{{"seed", c["seed"]}, {"filter", c["filter"]}, {"influence", c["influence"]}};
    case Stage::kEval:
      return Json{{"seed", c["seed"]}, {"client", c["client"]}, {"oracle", c["oracle"]},
                  {"eval", c["eval"]}};
    case Stage::kLossReport:
      return Json{{"objective", c["objective"]}};
  }
  return Json::object();
}

std::string hash_or_empty(const fs::path& p) { return fs::exists(p) ? file_sha256(p) : ""; }

// Why `stage` cannot be trusted as an upstream, or nullopt when it can. The
// returned stage is the one to rerun.
std::optional<std::pair<Stage, std::string>> stale_reason(Stage stage, const RunConfig& cfg,
                                                          const RunManifest& m,
                                                          std::set<Stage>& seen) {
  if (!seen.insert(stage).second) return std::nullopt;
  const std::string name(to_string(stage));
  auto it = m.stages.find(name);
  if (it == m.stages.end()) return std::pair{stage, name + " has not run"};
  if (it->second.status != "complete") return std::pair{stage, name + " did not complete"};

  std::vector<Input> inputs;
  try {
    inputs = stage_inputs(stage, cfg);
  } catch (const ConfigError& e) {
    return std::pair{stage, e.what()};
  }
  for (const auto& in : inputs) {
    if (!in.from) continue;
    if (auto r = stale_reason(*in.from, cfg, m, seen)) return r;
  }
  const StageState& st = it->second;
  if (st.config_hash != content_hash(stage_config(stage, cfg))) {
    return std::pair{stage, name + " ran with different settings"};
  }
  for (const auto& in : inputs) {
    auto rec = st.input_hashes.find(in.key);
    if (rec == st.input_hashes.end() || rec->second != hash_or_empty(in.path)) {
      return std::pair{stage, name + " input " + in.key + " changed"};
    }
  }
  for (const auto& [file, hash] : st.output_hashes) {
    if (hash_or_empty(cfg.run_dir() / file) != hash) {
      return std::pair{stage, name + " output " + file + " is missing or modified"};
    }
  }
  return std::nullopt;
}

struct Clients {
  std::unique_ptr<llm::TextClient> inner;
  std::unique_ptr<llm::CachingClient> cached;

  llm::TextClient& get() { return *cached; }
};

Clients make_client(const ClientConfig& c, const fs::path& cache_dir) {
  Clients out;
  if (c.kind == "mock") {
    out.inner = llm::ScriptedClient::from_file(c.script);
  } else {
    auto options = llm::http_options_from_env(c.model);
    if (!options) {
      throw ConfigError("http client needs FORGE_API_BASE and FORGE_API_KEY in the environment");
    }
    out.inner = std::make_unique<llm::HttpClient>(*options);
  }
  llm::RetryPolicy policy;
  policy.retries = c.retries;
  policy.base_delay = std::chrono::milliseconds(c.base_delay_ms);
  out.cached = std::make_unique<llm::CachingClient>(*out.inner, cache_dir, policy);
  return out;
}

std::unique_ptr<oracle::Oracle> make_oracle(const OracleConfig& c, int max_inflight) {
  if (c.kind == "external") {
    oracle::ExternalOptions options;
    options.cmd_template = c.command;
    options.known_cwes = std::set<std::string>(c.known_cwes.begin(), c.known_cwes.end());
    options.max_concurrency = max_inflight;
    return std::make_unique<oracle::ExternalOracle>(std::move(options));
  }
  return std::make_unique<oracle::BuiltinOracle>(
      c.rules_dir.empty() ? oracle::RuleSet::builtin() : oracle::RuleSet::load_dir(c.rules_dir));
}

template <typename T>
std::vector<T> read_rows(const fs::path& path) {
  std::vector<T> out;
  std::size_t line = 0;
  for (const auto& row : read_jsonl(path)) {
    ++line;
    try {
      out.push_back(row.get<T>());
    } catch (const Json::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

template <typename T>
std::vector<Json> to_rows(const std::vector<T>& items, const std::string& run_id = "") {
  std::vector<Json> rows;
  rows.reserve(items.size());
  for (const auto& item : items) {
    Json j = item;
    if (!run_id.empty()) j["run_id"] = run_id;
    rows.push_back(std::move(j));
  }
  return rows;
}

prefs::InstructionStore instruction_store(const fs::path& dir) {
  prefs::InstructionStore store;
  for (const auto* file : {"normals.jsonl", "instructions.jsonl"}) {
    for (auto& i : load_instructions(dir / file)) store[i.id] = std::move(i);
  }
  return store;
}

prefs::SampleStore sample_store(const fs::path& path) {
  prefs::SampleStore store;
  for (auto& s : read_rows<prefs::CodeSample>(path)) store[s.id] = std::move(s);
  return store;
}

Json cache_json(const llm::CacheStats& s) {
  return Json{{"calls", s.hits + s.misses},
              {"hits", s.hits},
              {"misses", s.misses},
              {"attempts", s.attempts},
              {"prompt_tokens", s.prompt_tokens},
              {"completion_tokens", s.completion_tokens}};
}

struct Produced {
  std::vector<std::string> files;
  Json counts = Json::object();
  llm::CacheStats cache;
};

void write_dataset(const fs::path& dir, const std::string& file, const std::vector<Json>& rows,
                   Produced& out) {
  write_jsonl_atomic(dir / file, rows);
  write_schema_sidecar(dir / file, rows.size());
  out.files.push_back(file);
  out.files.push_back(file + ".manifest.json");
}

void write_file(const fs::path& dir, const std::string& file, const Json& value, Produced& out) {
  write_json_atomic(dir / file, value);
  out.files.push_back(file);
}

Produced run_synth(const RunConfig& cfg) {
  const fs::path dir = cfg.run_dir();
  Produced out;
  const auto targets = load_cwe_targets(cfg.targets);
  SeedLoadStats seed_stats;
  const auto seeds = load_seed_instructions(cfg.seeds, &seed_stats);
  auto client = make_client(cfg.synth_client ? *cfg.synth_client : cfg.client, dir / "cache");
  const TrigramEmbedder embedder(cfg.embedding_dim);

  std::vector<Json> scenarios;
  std::map<std::string, Instruction> all;
  Json per_pair = Json::object();
  synth::SynthCounts total;
  for (const auto& pair : targets) {
    auto result = synth::synthesize_pair(pair, seeds, cfg.synth, client.get(), embedder);
    for (const auto& s : result.scenarios) scenarios.push_back(Json(s));
    const std::string file = "instructions." + pair.language + "." + pair.cwe + ".jsonl";
    save_instructions(dir / file, result.instructions);
    write_schema_sidecar(dir / file, result.instructions.size());
    out.files.push_back(file);
    out.files.push_back(file + ".manifest.json");
    for (const auto& i : result.instructions) all[i.id] = i;

    const auto& c = result.counts;
    Json diversity = nullptr;
    if (result.instructions.size() >= 2) diversity = synth::diversity_score(result.instructions, embedder);
    per_pair[pair.key()] = Json{{"scenarios", c.scenarios},
                                {"relevant", c.relevant},
                                {"synthesized", c.synthesized},
                                {"parse_failures", c.parse_failures},
                                {"clustered", c.clustered},
                                {"diversity", diversity}};
    total.scenarios += c.scenarios;
    total.relevant += c.relevant;
    total.synthesized += c.synthesized;
    total.parse_failures += c.parse_failures;
    total.clustered += c.clustered;
  }

  std::vector<Instruction> instructions;
  for (auto& [id, i] : all) instructions.push_back(std::move(i));
  write_dataset(dir, "scenarios.jsonl", scenarios, out);
  save_instructions(dir / "instructions.jsonl", instructions);
  write_schema_sidecar(dir / "instructions.jsonl", instructions.size());
  out.files.push_back("instructions.jsonl");
  out.files.push_back("instructions.jsonl.manifest.json");
  save_instructions(dir / "normals.jsonl", seeds);
  write_schema_sidecar(dir / "normals.jsonl", seeds.size());
  out.files.push_back("normals.jsonl");
  out.files.push_back("normals.jsonl.manifest.json");

  Json totals{{"scenarios", total.scenarios},     {"relevant", total.relevant},
              {"synthesized", total.synthesized}, {"parse_failures", total.parse_failures},
              {"clustered", total.clustered},     {"instructions", instructions.size()}};
  Json seeds_json{{"rows", seed_stats.rows},
                  {"kept", seeds.size()},
                  {"skipped_missing_text", seed_stats.skipped_missing_text},
                  {"duplicates", seed_stats.duplicates}};
  write_file(dir, "forge-manifest.json",
             Json{{"run_id", cfg.run_id},
                  {"schema_version", kSchemaVersion},
                  {"embedder", embedder.name()},
                  {"k", cfg.synth.k},
                  {"seeds", seeds_json},
                  {"per_pair", per_pair},
                  {"totals", totals}},
             out);
  out.counts = Json{{"pairs", targets.size()}, {"seeds", seeds_json}, {"totals", totals}};
  out.cache = client.cached->stats();
  return out;
}

Produced run_build_prefs(const RunConfig& cfg) {
  const fs::path dir = cfg.run_dir();
  Produced out;
  const auto store = instruction_store(dir);
  const auto instrs = load_instructions(dir / "instructions.jsonl");
  auto client = make_client(cfg.client, dir / "cache");
  const auto oracle = make_oracle(cfg.oracle, cfg.max_inflight);

  auto sec = prefs::build_sec(instrs, *oracle, client.get(), cfg.prefs);
  auto norm = prefs::build_norm(sec.triples, store, *oracle, client.get(), cfg.prefs);

  prefs::SampleStore samples = std::move(sec.samples);
  for (auto& [id, s] : norm.samples) samples.emplace(id, std::move(s));
  std::vector<Json> sample_rows;
  for (const auto& [id, s] : samples) {
    Json j = s;
    j["run_id"] = cfg.run_id;
    sample_rows.push_back(std::move(j));
  }
  write_dataset(dir, "samples.jsonl", sample_rows, out);
  write_dataset(dir, "dsec.candidates.jsonl", to_rows(sec.triples, cfg.run_id), out);
  write_dataset(dir, "dnorm.candidates.jsonl", to_rows(norm.triples, cfg.run_id), out);
  out.counts = Json{{"sec", sec.counts}, {"norm", norm.counts}, {"samples", samples.size()}};
  out.cache = client.cached->stats();
  return out;
}

Produced run_filter(const RunConfig& cfg) {
  const fs::path dir = cfg.run_dir();
  Produced out;
  const auto store = instruction_store(dir);
  const auto samples = sample_store(dir / "samples.jsonl");
  const auto candidates = read_rows<prefs::SecTriple>(dir / "dsec.candidates.jsonl");
  const auto dnorm = read_rows<prefs::NormTriple>(dir / "dnorm.candidates.jsonl");

  selector::FilterReport report;
  const auto kept = selector::heuristic_filter_sec(candidates, samples, cfg.filter, &report);
  write_dataset(dir, "dsec.star.jsonl", to_rows(kept, cfg.run_id), out);
  write_file(dir, "filter-report.json", Json(report), out);

  const auto warmup = selector::finalize(kept, {}, samples, store, cfg.seed);
  const auto problems = bridge::validate_pref_rows(warmup.rows, std::string("sec"));
  if (!problems.empty()) throw ValidationError("warm-up rows: " + problems.front());
  write_dataset(dir, "dsec.prefs.jsonl", warmup.rows, out);

  const auto subjects = bridge::trace_subjects(dnorm, kept, samples, store);
  write_dataset(dir, "trace-subjects.jsonl", subjects, out);
  out.counts = Json{{"filter", report}, {"trace_subjects", subjects.size()}};
  return out;
}

// Keeps the `cap` highest scores; ties go to the smaller id. Output sorted by id.
std::vector<prefs::NormTriple> cap_by_score(std::vector<prefs::NormTriple> triples,
                                            const std::map<std::string, selector::InfluenceScore>& scores,
                                            std::size_t cap) {
  if (triples.size() <= cap) return triples;
  std::sort(triples.begin(), triples.end(), [&](const auto& a, const auto& b) {
    const double sa = scores.at(a.id).score;
    const double sb = scores.at(b.id).score;
    if (sa != sb) return sa > sb;
    return a.id < b.id;
  });
  triples.resize(cap);
  std::sort(triples.begin(), triples.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return triples;
}

Produced run_influence(const RunConfig& cfg) {
  const fs::path dir = cfg.run_dir();
  Produced out;
  const auto dsec = read_rows<prefs::SecTriple>(dir / "dsec.star.jsonl");
  std::set<std::string> sec_ids;
  for (const auto& t : dsec) sec_ids.insert(t.id);
  std::vector<prefs::NormTriple> candidates;
  std::size_t unlinked = 0;
  for (auto& t : read_rows<prefs::NormTriple>(dir / "dnorm.candidates.jsonl")) {
    if (sec_ids.count(t.sec_link)) {
      candidates.push_back(std::move(t));
    } else {
      ++unlinked;
    }
  }

  const auto traces = selector::TraceSet::load(cfg.dynamics);
  const auto subjects = read_jsonl(dir / "trace-subjects.jsonl");
  const auto problems = bridge::validate_dynamics(traces, subjects);
  if (!problems.empty()) {
    throw ValidationError(cfg.dynamics.string() + ": " + std::to_string(problems.size()) +
                          " problem(s), first: " + problems.front());
  }

  std::map<std::string, selector::InfluenceScore> scores;
  std::vector<Json> score_rows;
  std::size_t no_signal = 0;
  for (const auto& t : candidates) {
    auto s = selector::influence(t, traces, cfg.measure);
    if (s.no_signal) ++no_signal;
    score_rows.push_back(Json(s));
    scores.emplace(t.id, std::move(s));
  }
  write_dataset(dir, "influence.jsonl", score_rows, out);

  selector::SelectReport report;
  auto selected = selector::select_norm(candidates, scores, cfg.top_k, cfg.discard_quantile, &report);
  Json ratio = nullptr;
  if (cfg.dnorm_ratio) {
    const auto cap = static_cast<std::size_t>(std::floor(*cfg.dnorm_ratio * static_cast<double>(candidates.size())));
    selected = cap_by_score(std::move(selected), scores, cap);
    ratio = Json{{"ratio", *cfg.dnorm_ratio}, {"cap", cap}, {"kept", selected.size()}};
  }
  write_dataset(dir, "dnorm.star.jsonl", to_rows(selected, cfg.run_id), out);
  Json report_json = report;
  report_json["unlinked_candidates"] = unlinked;
  report_json["no_signal"] = no_signal;
  report_json["measure"] = selector::to_string(cfg.measure);
  report_json["top_k"] = cfg.top_k;
  report_json["discard_quantile"] = cfg.discard_quantile;
  report_json["dnorm_ratio"] = ratio;
  report_json["selected"] = selected.size();
  write_file(dir, "select-report.json", report_json, out);
  out.counts = report_json;
  return out;
}

Produced run_finalize(const RunConfig& cfg) {
  const fs::path dir = cfg.run_dir();
  Produced out;
  const auto store = instruction_store(dir);
  const auto samples = sample_store(dir / "samples.jsonl");
  const auto dsec = read_rows<prefs::SecTriple>(dir / "dsec.star.jsonl");
  const auto dnorm = read_rows<prefs::NormTriple>(dir / "dnorm.star.jsonl");

  auto result = selector::finalize(dsec, dnorm, samples, store, cfg.seed);
  const auto problems = bridge::validate_pref_rows(result.rows);
  if (!problems.empty()) throw ValidationError("final rows: " + problems.front());
  write_jsonl_atomic(dir / "final.prefs.jsonl", result.rows);
  out.files.push_back("final.prefs.jsonl");

  Json manifest = result.manifest;
  manifest["run_id"] = cfg.run_id;
  manifest["dataset"] = "final.prefs.jsonl";
  manifest["thresholds"] = Json{{"min_lines", cfg.filter.min_lines},
                                {"dedup_ratio", cfg.filter.dedup_ratio},
                                {"skip_keywords", cfg.filter.skip_keywords},
                                {"top_k", cfg.top_k},
                                {"discard_quantile", cfg.discard_quantile},
                                {"dnorm_ratio", cfg.dnorm_ratio ? Json(*cfg.dnorm_ratio) : Json(nullptr)}};
  manifest["measure"] = selector::to_string(cfg.measure);
  write_file(dir, "final.manifest.json", manifest, out);
  out.counts = Json{{"rows", manifest["rows"]}, {"sec", manifest["sec"]}, {"norm", manifest["norm"]}};
  return out;
}

Produced run_eval(const RunConfig& cfg) {
  const fs::path dir = cfg.run_dir();
  Produced out;
  const auto suite = load_eval_suite(cfg.eval_suite);
  if (suite.empty()) throw ValidationError(cfg.eval_suite.string() + " holds no instructions");
  auto client = make_client(cfg.client, dir / "cache");
  const auto oracle = make_oracle(cfg.oracle, cfg.max_inflight);

  const auto report = eval::secure_ratio(suite, client.get(), *oracle, cfg.eval_n, cfg.eval_params,
                                         cfg.max_inflight);
  Json report_json = report;
  report_json["model"] = client.get().model();
  report_json["n"] = cfg.eval_n;

  Json refine = Json::object();
  for (int budget : cfg.refine_budgets) {
    using Result = std::pair<std::string, eval::RefineResult>;
    auto results = llm::parallel_map<Result>(suite.size(), cfg.max_inflight, [&](std::size_t k) {
      const auto& instr = suite[k];
      return Result{instr.id, eval::iterative_refine(instr, instr.pair->language, client.get(),
                                                     *oracle, budget, cfg.eval_params)};
    });
    std::size_t secure = 0;
    long iters = 0;
    Json rows = Json::array();
    for (const auto& [id, r] : results) {
      if (r.secure) ++secure;
      iters += r.iters_used;
      Json row = r;
      row.erase("final_code");
      row["instruction_id"] = id;
      rows.push_back(std::move(row));
    }
    refine[std::to_string(budget)] =
        Json{{"instructions", results.size()},
             {"secure", secure},
             {"vulnerable_ratio", 1.0 - static_cast<double>(secure) / static_cast<double>(results.size())},
             {"mean_iters", static_cast<double>(iters) / static_cast<double>(results.size())},
             {"results", rows}};
  }
  report_json["refine"] = refine;

  report_json["trigger"] = nullptr;
  if (cfg.trigger) {
    const auto induced = load_instructions(dir / "instructions.jsonl");
    std::set<std::string> origins;
    for (const auto& x : induced) {
      if (x.origin_id) origins.insert(*x.origin_id);
    }
    std::vector<Instruction> normal;
    for (auto& x : load_instructions(dir / "normals.jsonl")) {
      if (origins.count(x.id)) normal.push_back(std::move(x));
    }
    const auto trigger = eval::trigger_comparison(normal, induced, client.get(), *oracle,
                                                  cfg.eval_n, cfg.eval_params);
    report_json["trigger"] = trigger;
  }

  write_file(dir, "eval-report.json", report_json, out);
  write_jsonl_atomic(dir / "eval-samples.jsonl", to_rows(report.samples));
  out.files.push_back("eval-samples.jsonl");
  out.counts = Json{{"instructions", report.instructions},
                    {"failed", report.failed_instructions},
                    {"samples", report.samples.size()},
                    {"aggregate_ratio", report.aggregate_ratio}};
  out.cache = client.cached->stats();
  return out;
}

Produced run_loss_report(const RunConfig& cfg) {
  const fs::path dir = cfg.run_dir();
  Produced out;
  const auto rows = objective::load_pairlogprobs(cfg.pairlogprobs);
  const auto summary = objective::dataset_loss(rows, cfg.beta, cfg.gamma);
  write_file(dir, "loss-report.json",
             Json{{"run_id", cfg.run_id}, {"beta", cfg.beta}, {"gamma", cfg.gamma}, {"loss", summary}},
             out);
  out.counts = Json{{"rows", rows.size()}, {"mean", summary.mean}};
  return out;
}

Produced dispatch(Stage stage, const RunConfig& cfg) {
  switch (stage) {
    case Stage::kSynth: return run_synth(cfg);
    case Stage::kBuildPrefs: return run_build_prefs(cfg);
    case Stage::kFilter: return run_filter(cfg);
    case Stage::kInfluence: return run_influence(cfg);
    case Stage::kFinalize: return run_finalize(cfg);
    case Stage::kEval: return run_eval(cfg);
    case Stage::kLossReport: return run_loss_report(cfg);
  }
  throw ValidationError("unknown stage");
}

}  // namespace

StageOutcome run_stage(Stage stage, const RunConfig& cfg, const StageOptions& options) {
  const fs::path dir = cfg.run_dir();
  fs::create_directories(dir);
  RunManifest manifest = RunManifest::load_or_init(dir, cfg);
  const std::string name(to_string(stage));

  const auto inputs = stage_inputs(stage, cfg);
  if (!options.force) {
    std::set<Stage> seen{stage};
    for (const auto& in : inputs) {
      if (!in.from) continue;
      if (auto r = stale_reason(*in.from, cfg, manifest, seen)) {
        const std::string rerun(to_string(r->first));
        throw StaleInputError(name + ": " + r->second + "; rerun `forge " + rerun + "`", rerun);
      }
    }
  }
  for (const auto& in : inputs) {
    if (!fs::exists(in.path)) {
      throw StaleInputError(name + ": missing " + in.path.string(),
                            in.from ? std::string(to_string(*in.from)) : name);
    }
  }

  StageOutcome outcome;
  outcome.stage = stage;
  if (!options.force) {
    std::set<Stage> seen;
    if (manifest.stages.count(name) && !stale_reason(stage, cfg, manifest, seen)) {
      outcome.skipped = true;
      outcome.counts = manifest.stages[name].counts;
      spdlog::info("{}: up to date", name);
      return outcome;
    }
  }

  StageState state;
  state.config_hash = content_hash(stage_config(stage, cfg));
  for (const auto& in : inputs) state.input_hashes[in.key] = file_sha256(in.path);

  Produced produced;
  try {
    produced = dispatch(stage, cfg);
  } catch (const std::exception& e) {
    state.status = "failed";
    state.counts = Json{{"error", e.what()}};
    manifest.stages[name] = state;
    manifest.save(dir);
    throw;
  }
  state.status = "complete";
  for (const auto& file : produced.files) state.output_hashes[file] = file_sha256(dir / file);
  state.counts = produced.counts;
  if (produced.cache.hits + produced.cache.misses > 0) state.counts["llm"] = cache_json(produced.cache);
  manifest.stages[name] = state;
  manifest.save(dir);

  outcome.counts = state.counts;
  outcome.cache = produced.cache;
  spdlog::info("{}: complete", name);
  return outcome;
}

}  // namespace forge::pipeline
