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

#include "forge/error.hpp"
#include "forge/pipeline.hpp"
#include "toml.hpp"

namespace forge::pipeline {

namespace {

class Reader {
 public:
  Reader(const toml::table& root, std::string origin) : root_(root), origin_(std::move(origin)) {}

  const toml::table* table(std::string_view name) const {
    const toml::node* n = root_.get(name);
    if (!n) return nullptr;
    if (!n->is_table()) fail(std::string(name) + " must be a table");
    return n->as_table();
  }

  template <typename T>
  T get(const toml::table* t, std::string_view key, T fallback, std::string_view section) const {
    if (!t) return fallback;
    const toml::node* n = t->get(key);
    if (!n) return fallback;
    if constexpr (std::is_same_v<T, bool>) {
      if (auto v = n->value<bool>()) return *v;
    } else if constexpr (std::is_integral_v<T>) {
      if (n->is_integer()) return static_cast<T>(*n->value<std::int64_t>());
    } else if constexpr (std::is_floating_point_v<T>) {
      if (n->is_number()) return static_cast<T>(*n->value<double>());
    } else {
      if (auto v = n->value<std::string>()) return *v;
    }
    fail(std::string(section) + "." + std::string(key) + " has the wrong type");
  }

  std::vector<std::string> strings(const toml::table* t, std::string_view key,
                                   std::vector<std::string> fallback,
                                   std::string_view section) const {
    if (!t || !t->get(key)) return fallback;
    const toml::array* a = t->get(key)->as_array();
    if (!a) fail(std::string(section) + "." + std::string(key) + " must be an array");
    std::vector<std::string> out;
    for (const auto& e : *a) {
      auto v = e.value<std::string>();
      if (!v) fail(std::string(section) + "." + std::string(key) + " must hold strings");
      out.push_back(*v);
    }
    return out;
  }

  std::vector<int> ints(const toml::table* t, std::string_view key,
                        std::string_view section) const {
    std::vector<int> out;
    if (!t || !t->get(key)) return out;
    const toml::array* a = t->get(key)->as_array();
    if (!a) fail(std::string(section) + "." + std::string(key) + " must be an array");
    for (const auto& e : *a) {
      auto v = e.value<std::int64_t>();
      if (!v) fail(std::string(section) + "." + std::string(key) + " must hold integers");
      out.push_back(static_cast<int>(*v));
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(origin_ + ": " + msg); }

 private:
  const toml::table& root_;
  std::string origin_;
};

std::filesystem::path resolve(const std::filesystem::path& dir, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() ? path : (dir / path).lexically_normal();
}

ClientConfig read_client(const Reader& r, const toml::table* t, std::string_view section,
                         const std::filesystem::path& dir) {
  ClientConfig c;
  c.kind = r.get<std::string>(t, "kind", c.kind, section);
  if (c.kind != "mock" && c.kind != "http") r.fail(std::string(section) + ".kind must be mock or http");
  c.script = resolve(dir, r.get<std::string>(t, "script", "", section));
  c.model = r.get<std::string>(t, "model", c.kind == "mock" ? "mock" : "", section);
  c.retries = r.get<int>(t, "retries", c.retries, section);
  c.base_delay_ms = r.get<int>(t, "base_delay_ms", c.base_delay_ms, section);
  if (c.kind == "mock" && c.script.empty()) r.fail(std::string(section) + ": mock client needs a script");
  if (c.kind == "http" && c.model.empty()) r.fail(std::string(section) + ": http client needs a model");
  if (c.retries < 1) r.fail(std::string(section) + ".retries must be >= 1");
  return c;
}

llm::GenerationParams read_params(const Reader& r, const toml::table* t, std::string_view prefix,
                                  llm::GenerationParams p, std::string_view section) {
  const std::string pre(prefix);
  p.temperature = r.get<double>(t, pre + "temperature", p.temperature, section);
  p.top_p = r.get<double>(t, pre + "top_p", p.top_p, section);
  p.max_tokens = r.get<int>(t, pre + "max_tokens", p.max_tokens, section);
  p.n_samples = r.get<int>(t, pre + "samples", p.n_samples, section);
  try {
    llm::validate(p);
  } catch (const ValidationError& e) {
    r.fail(std::string(section) + ": " + e.what());
  }
  return p;
}

std::string rel(const std::filesystem::path& p, const std::filesystem::path& dir) {
  if (p.empty()) return "";
  return p.lexically_relative(dir).generic_string();
}

Json params_json(const llm::GenerationParams& p) { return Json(p); }

Json client_json(const ClientConfig& c, const std::filesystem::path& dir) {
  return Json{{"kind", c.kind},
              {"script", rel(c.script, dir)},
              {"model", c.model},
              {"retries", c.retries}};
}

}  // namespace

void refresh_canonical(RunConfig& cfg) {
  const auto& d = cfg.config_dir;
  Json j{{"run_id", cfg.run_id},
         {"seed", cfg.seed},
         {"client", client_json(cfg.client, d)},
         {"inputs", {{"targets", rel(cfg.targets, d)},
                     {"seeds", rel(cfg.seeds, d)},
                     {"dynamics", rel(cfg.dynamics, d)},
                     {"pairlogprobs", rel(cfg.pairlogprobs, d)},
                     {"eval_suite", rel(cfg.eval_suite, d)}}},
         {"oracle", {{"kind", cfg.oracle.kind},
                     {"rules_dir", rel(cfg.oracle.rules_dir, d)},
                     {"command", cfg.oracle.command},
                     {"known_cwes", cfg.oracle.known_cwes}}},
         {"synth", {{"k", cfg.synth.k},
                    {"scenario", params_json(cfg.synth.scenario_params)},
                    {"compose", params_json(cfg.synth.compose_params)},
                    {"relevance_cap", cfg.synth.relevance.cap},
                    {"keywords", cfg.synth.relevance.keywords},
                    {"embedding_dim", cfg.embedding_dim}}},
         {"prefs", {{"vuln", params_json(cfg.prefs.vuln_params)},
                    {"fix", params_json(cfg.prefs.fix_params)},
                    {"norm", params_json(cfg.prefs.norm_params)},
                    {"max_pairs_per_instruction", cfg.prefs.max_pairs_per_instruction},
                    {"max_norm_per_sec", cfg.prefs.max_norm_per_sec},
                    {"allow_clean_as_win", cfg.prefs.allow_clean_as_win}}},
         {"filter", {{"min_lines", cfg.filter.min_lines},
                     {"dedup_ratio", cfg.filter.dedup_ratio},
                     {"skip_keywords", cfg.filter.skip_keywords}}},
         {"influence", {{"measure", selector::to_string(cfg.measure)},
                        {"top_k", cfg.top_k},
                        {"discard_quantile", cfg.discard_quantile},
                        {"dnorm_ratio", cfg.dnorm_ratio ? Json(*cfg.dnorm_ratio) : Json(nullptr)}}},
         {"objective", {{"beta", cfg.beta}, {"gamma", cfg.gamma}}},
         {"eval", {{"n", cfg.eval_n},
                   {"params", params_json(cfg.eval_params)},
                   {"refine_budgets", cfg.refine_budgets},
                   {"trigger", cfg.trigger}}}};
  if (cfg.synth_client) j["synth_client"] = client_json(*cfg.synth_client, d);
  cfg.canonical = std::move(j);
}

RunConfig parse_config(std::string_view toml_text, const std::filesystem::path& config_dir) {
  toml::table root;
  const std::string origin = (config_dir / "run.toml").string();
  try {
    root = toml::parse(toml_text, origin);
  } catch (const toml::parse_error& e) {
    throw ConfigError(origin + ": " + std::string(e.description()));
  }
  Reader r(root, origin);
  const toml::table* top = &root;
  RunConfig cfg;
  cfg.config_dir = config_dir;
  const auto& dir = config_dir;

  cfg.seed = r.get<std::uint64_t>(top, "seed", 0, "run");
  cfg.max_inflight = r.get<int>(top, "max_inflight", 4, "run");
  cfg.run_id = r.get<std::string>(top, "run_id", "", "run");
  cfg.run_root = resolve(dir, r.get<std::string>(top, "run_root", "runs", "run"));
  if (cfg.max_inflight < 1) r.fail("max_inflight must be >= 1");

  if (const auto* c = r.table("client")) {
    cfg.client = read_client(r, c, "client", dir);
  } else {
    r.fail("missing [client]");
  }
  if (const auto* c = r.table("synth_client")) cfg.synth_client = read_client(r, c, "synth_client", dir);

  const auto* in = r.table("inputs");
  cfg.targets = resolve(dir, r.get<std::string>(in, "targets", "", "inputs"));
  cfg.seeds = resolve(dir, r.get<std::string>(in, "seeds", "", "inputs"));
  cfg.dynamics = resolve(dir, r.get<std::string>(in, "dynamics", "", "inputs"));
  cfg.pairlogprobs = resolve(dir, r.get<std::string>(in, "pairlogprobs", "", "inputs"));
  cfg.eval_suite = resolve(dir, r.get<std::string>(in, "eval_suite", "", "inputs"));

  const auto* orc = r.table("oracle");
  cfg.oracle.kind = r.get<std::string>(orc, "kind", "builtin", "oracle");
  cfg.oracle.rules_dir = resolve(dir, r.get<std::string>(orc, "rules_dir", "", "oracle"));
  cfg.oracle.command = r.get<std::string>(orc, "command", "", "oracle");
  cfg.oracle.known_cwes = r.strings(orc, "known_cwes", {}, "oracle");
  if (cfg.oracle.kind != "builtin" && cfg.oracle.kind != "external") {
    r.fail("oracle.kind must be builtin or external");
  }
  if (cfg.oracle.kind == "external" && cfg.oracle.command.empty()) {
    r.fail("external oracle needs oracle.command");
  }

  const auto* sy = r.table("synth");
  cfg.synth.k = r.get<int>(sy, "k", 2000, "synth");
  cfg.synth.scenario_params =
      read_params(r, sy, "scenario_", llm::GenerationParams{1.0, 1.0, 1024, 4, 0}, "synth");
  cfg.synth.compose_params =
      read_params(r, sy, "compose_", llm::GenerationParams{0.8, 1.0, 1024, 1, 0}, "synth");
  cfg.synth.compose_params.n_samples = 1;
  cfg.synth.relevance.cap = r.get<std::size_t>(sy, "relevance_cap", 2000, "synth");
  cfg.synth.relevance.keywords = r.strings(sy, "keywords", {}, "synth");
  cfg.embedding_dim = r.get<int>(sy, "embedding_dim", 256, "synth");
  if (cfg.synth.k < 1) r.fail("synth.k must be >= 1");
  if (cfg.embedding_dim < 1) r.fail("synth.embedding_dim must be >= 1");

  const auto* pr = r.table("prefs");
  cfg.prefs.vuln_params =
      read_params(r, pr, "vuln_", llm::GenerationParams{0.8, 1.0, 2048, 16, 0}, "prefs");
  cfg.prefs.fix_params =
      read_params(r, pr, "fix_", llm::GenerationParams{0.8, 1.0, 2048, 8, 0}, "prefs");
  cfg.prefs.norm_params =
      read_params(r, pr, "norm_", llm::GenerationParams{0.8, 1.0, 2048, 8, 0}, "prefs");
  cfg.prefs.max_pairs_per_instruction = r.get<int>(pr, "max_pairs_per_instruction", 4, "prefs");
  cfg.prefs.max_norm_per_sec = r.get<int>(pr, "max_norm_per_sec", 8, "prefs");
  cfg.prefs.allow_clean_as_win = r.get<bool>(pr, "allow_clean_as_win", false, "prefs");

  const auto* fi = r.table("filter");
  cfg.filter.min_lines = r.get<int>(fi, "min_lines", 5, "filter");
  cfg.filter.dedup_ratio = r.get<int>(fi, "dedup_ratio", 90, "filter");
  cfg.filter.skip_keywords = r.strings(fi, "skip_keywords", cfg.filter.skip_keywords, "filter");
  if (cfg.filter.dedup_ratio < 0 || cfg.filter.dedup_ratio > 100) {
    r.fail("filter.dedup_ratio must be within 0..100");
  }

  const auto* inf = r.table("influence");
  try {
    cfg.measure = selector::parse_measure(r.get<std::string>(inf, "measure", "default", "influence"));
  } catch (const ValidationError& e) {
    r.fail(e.what());
  }
  cfg.top_k = r.get<int>(inf, "top_k", 2, "influence");
  cfg.discard_quantile = r.get<double>(inf, "discard_quantile", 0.2, "influence");
  if (inf && inf->get("dnorm_ratio")) cfg.dnorm_ratio = r.get<double>(inf, "dnorm_ratio", 0.0, "influence");
  if (cfg.top_k < 0) r.fail("influence.top_k must be >= 0");
  if (!(cfg.discard_quantile >= 0 && cfg.discard_quantile < 1)) {
    r.fail("influence.discard_quantile must be within [0, 1)");
  }
  if (cfg.dnorm_ratio && !(*cfg.dnorm_ratio > 0 && *cfg.dnorm_ratio <= 1)) {
    r.fail("influence.dnorm_ratio must be within (0, 1]");
  }

  const auto* ob = r.table("objective");
  cfg.beta = r.get<double>(ob, "beta", 1.5, "objective");
  cfg.gamma = r.get<double>(ob, "gamma", 0.5, "objective");
  if (!(cfg.beta > 0)) r.fail("objective.beta must be > 0");

  const auto* ev = r.table("eval");
  cfg.eval_n = r.get<int>(ev, "n", 10, "eval");
  cfg.eval_params = read_params(r, ev, "", llm::GenerationParams{0.8, 1.0, 2048, 1, 0}, "eval");
  cfg.refine_budgets = r.ints(ev, "refine_budgets", "eval");
  cfg.trigger = r.get<bool>(ev, "trigger", false, "eval");
  if (cfg.eval_n < 1) r.fail("eval.n must be >= 1");
  for (int b : cfg.refine_budgets) {
    if (b < 1) r.fail("eval.refine_budgets must be >= 1");
  }

  for (auto* p : {&cfg.synth.scenario_params, &cfg.synth.compose_params, &cfg.prefs.vuln_params,
                  &cfg.prefs.fix_params, &cfg.prefs.norm_params, &cfg.eval_params}) {
    p->seed = static_cast<std::int64_t>(cfg.seed);
  }
  cfg.synth.seed = cfg.seed;
  cfg.synth.max_inflight = cfg.max_inflight;
  cfg.prefs.max_inflight = cfg.max_inflight;

  refresh_canonical(cfg);
  if (cfg.run_id.empty()) {
    cfg.run_id = "run-" + content_hash(cfg.canonical).substr(0, 12);
    refresh_canonical(cfg);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("no config file " + path.string());
  const auto dir = std::filesystem::absolute(path).parent_path();
  return parse_config(read_text(path), dir);
}

ClientConfig load_client_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("no client config " + path.string());
  toml::table root;
  try {
    root = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw ConfigError(path.string() + ": " + std::string(e.description()));
  }
  Reader r(root, path.string());
  const toml::table* t = r.table("client");
  if (!t) t = &root;
  return read_client(r, t, "client", std::filesystem::absolute(path).parent_path());
}

}  // namespace forge::pipeline
