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

#include <cmath>
#include <cstdlib>
#include <ctime>

#include "forge/llm.hpp"
#include "httplib.h"

namespace forge::llm {

void validate(const GenerationParams& p) {
  if (!(p.temperature >= 0) || !std::isfinite(p.temperature)) {
    throw ValidationError("temperature must be >= 0");
  }
  if (!(p.top_p > 0 && p.top_p <= 1)) throw ValidationError("top_p must be in (0, 1]");
  if (p.max_tokens <= 0) throw ValidationError("max_tokens must be > 0");
  if (p.n_samples <= 0) throw ValidationError("n_samples must be > 0");
}

void to_json(Json& j, const GenerationParams& p) {
  j = Json{{"temperature", p.temperature},
           {"top_p", p.top_p},
           {"max_tokens", p.max_tokens},
           {"n_samples", p.n_samples},
           {"seed", p.seed}};
}

void from_json(const Json& j, GenerationParams& p) {
  GenerationParams d;
  p.temperature = j.value("temperature", d.temperature);
  p.top_p = j.value("top_p", d.top_p);
  p.max_tokens = j.value("max_tokens", d.max_tokens);
  p.n_samples = j.value("n_samples", d.n_samples);
  p.seed = j.value("seed", d.seed);
  validate(p);
}

// ---- ScriptedClient

ScriptedClient::ScriptedClient(Json script) {
  if (!script.is_object()) throw ConfigError("mock script must be a JSON object");
  model_ = script.value("model", std::string("mock"));
  if (script.contains("default")) default_ = script.at("default").get<std::string>();
  for (const auto& r : script.value("rules", Json::array())) {
    Rule rule;
    const Json& c = r.at("contains");
    if (c.is_string()) {
      rule.contains.push_back(c.get<std::string>());
    } else {
      rule.contains = c.get<std::vector<std::string>>();
    }
    rule.responses = r.value("responses", std::vector<std::string>());
    if (r.contains("response")) rule.responses.push_back(r.at("response").get<std::string>());
    rule.fail_first = r.value("fail_first", 0);
    rule.status = r.value("status", 503);
    if (rule.responses.empty()) throw ConfigError("mock rule without responses");
    rules_.push_back(std::move(rule));
  }
}

std::unique_ptr<ScriptedClient> ScriptedClient::from_file(const std::filesystem::path& path) {
  try {
    return std::make_unique<ScriptedClient>(Json::parse(read_text(path)));
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Completion ScriptedClient::complete(const std::string& prompt, const GenerationParams&,
                                    int sample_index) {
  ++calls_;
  const auto idx = static_cast<std::size_t>(std::max(0, sample_index));
  for (auto& rule : rules_) {
    bool all = true;
    for (const auto& needle : rule.contains) {
      if (prompt.find(needle) == std::string::npos) {
        all = false;
        break;
      }
    }
    if (!all) continue;
    {
      std::lock_guard lock(mu_);
      if (rule.failures < rule.fail_first) {
        ++rule.failures;
        const bool retryable = rule.status == 429 || rule.status >= 500;
        throw ClientError("mock: scripted failure " + std::to_string(rule.status), retryable);
      }
    }
    const std::string& text = rule.responses[idx % rule.responses.size()];
    return {text, static_cast<long>(prompt.size() / 4), static_cast<long>(text.size() / 4)};
  }
  if (default_) {
    return {*default_, static_cast<long>(prompt.size() / 4),
            static_cast<long>(default_->size() / 4)};
  }
  throw ClientError("mock: no rule matches prompt " + sha256_hex(prompt).substr(0, 12), false);
}

// ---- HttpClient

std::optional<HttpOptions> http_options_from_env(std::string model) {
  const char* base = std::getenv("FORGE_API_BASE");
  const char* key = std::getenv("FORGE_API_KEY");
  if (!base || !key || !*base || !*key) return std::nullopt;
  HttpOptions o;
  o.base_url = base;
  o.api_key = key;
  o.model = std::move(model);
  return o;
}

HttpClient::HttpClient(HttpOptions options) : options_(std::move(options)) {
  while (!options_.base_url.empty() && options_.base_url.back() == '/') {
    options_.base_url.pop_back();
  }
}

Completion HttpClient::complete(const std::string& prompt, const GenerationParams& params,
                                int sample_index) {
  // Split "scheme://host[:port]" from the path prefix.
  const std::string& url = options_.base_url;
  const std::size_t scheme_end = url.find("://");
  const std::size_t path_begin =
      url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string origin = url.substr(0, path_begin);
  const std::string prefix = path_begin == std::string::npos ? "" : url.substr(path_begin);

  httplib::Client cli(origin);
  cli.set_read_timeout(options_.timeout_seconds, 0);
  cli.set_write_timeout(options_.timeout_seconds, 0);
  cli.set_bearer_token_auth(options_.api_key);

  const Json body{{"model", options_.model},
                  {"messages", Json::array({Json{{"role", "user"}, {"content", prompt}}})},
                  {"temperature", params.temperature},
                  {"top_p", params.top_p},
                  {"max_tokens", params.max_tokens},
                  {"seed", params.seed + sample_index}};
  const std::string tag = "prompt sha256:" + sha256_hex(prompt).substr(0, 12);
  auto res = cli.Post(prefix + "/chat/completions", body.dump(), "application/json");
  if (!res) {
    throw ClientError("http: " + httplib::to_string(res.error()) + " (" + tag + ")", true);
  }
  if (res->status != 200) {
    const bool retryable = res->status == 429 || res->status >= 500;
    throw ClientError("http: status " + std::to_string(res->status) + " (" + tag + ")",
                      retryable);
  }
  try {
    const Json j = Json::parse(res->body);
    Completion c;
    const Json& content = j.at("choices").at(0).at("message").at("content");
    c.text = content.is_null() ? "" : content.get<std::string>();
    if (j.contains("usage")) {
      c.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
      c.completion_tokens = j["usage"].value("completion_tokens", 0L);
    }
    return c;
  } catch (const Json::exception& e) {
    throw ClientError(std::string("http: malformed response: ") + e.what() + " (" + tag + ")",
                      true);
  }
}

// ---- CachingClient

CachingClient::CachingClient(TextClient& inner, std::filesystem::path dir, RetryPolicy policy,
                             Sleeper sleeper)
    : inner_(inner), dir_(std::move(dir)), policy_(policy), sleeper_(std::move(sleeper)) {
  if (policy_.retries < 1) throw ConfigError("retries must be >= 1");
}

std::string CachingClient::cache_key(const std::string& prompt, const GenerationParams& params,
                                     int sample_index) const {
  return content_hash(Json{{"client_id", inner_.client_id()},
                           {"model", inner_.model()},
                           {"prompt", prompt},
                           {"params", params},
                           {"sample_index", sample_index}});
}

std::filesystem::path CachingClient::entry_path(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

CacheStats CachingClient::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

Completion CachingClient::complete(const std::string& prompt, const GenerationParams& params,
                                   int sample_index) {
  const std::string key = cache_key(prompt, params, sample_index);
  const auto path = entry_path(key);
  if (std::filesystem::exists(path)) {
    try {
      const Json entry = Json::parse(read_text(path));
      if (entry.at("key") == key) {
        std::lock_guard lock(mu_);
        ++stats_.hits;
        return {entry.at("value").get<std::string>(), 0, 0};
      }
    } catch (const Json::exception&) {
      spdlog::warn("cache: ignoring unreadable entry {}", path.string());
    }
  }

  auto delay = policy_.base_delay;
  for (int attempt = 1;; ++attempt) {
    {
      std::lock_guard lock(mu_);
      ++stats_.attempts;
    }
    try {
      Completion c = inner_.complete(prompt, params, sample_index);
      // An entry another thread already wrote wins; entries never change.
      if (!std::filesystem::exists(path)) {
        write_json_atomic(path, Json{{"key", key},
                                     {"value", c.text},
                                     {"created_at", static_cast<std::int64_t>(std::time(nullptr))}});
      }
      std::lock_guard lock(mu_);
      ++stats_.misses;
      stats_.prompt_tokens += c.prompt_tokens;
      stats_.completion_tokens += c.completion_tokens;
      if (attempt > 1) spdlog::info("llm: succeeded after {} attempts", attempt);
      return c;
    } catch (const ClientError& e) {
      if (!e.retryable() || attempt >= policy_.retries) {
        throw ClientError(std::string(e.what()) + " after " + std::to_string(attempt) +
                              " attempt(s)",
                          e.retryable(), attempt);
      }
      spdlog::warn("llm: attempt {} failed: {}", attempt, e.what());
      sleeper_(delay);
      delay = std::chrono::milliseconds(
          static_cast<long>(static_cast<double>(delay.count()) * policy_.multiplier));
    }
  }
}

}  // namespace forge::llm
