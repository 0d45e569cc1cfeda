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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "forge/error.hpp"
#include "forge/io.hpp"

namespace forge::llm {

struct GenerationParams {
  double temperature = 0.8;
  double top_p = 1.0;
  int max_tokens = 1024;
  int n_samples = 1;
  std::int64_t seed = 0;

  friend bool operator==(const GenerationParams&, const GenerationParams&) = default;
};

// Throws ValidationError on out-of-range knobs.
void validate(const GenerationParams& p);

void to_json(Json& j, const GenerationParams& p);
void from_json(const Json& j, GenerationParams& p);

struct Completion {
  std::string text;
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

// One chat turn in, one completion out. `sample_index` distinguishes repeated
// draws for the same prompt.
class TextClient {
 public:
  virtual ~TextClient() = default;
  virtual Completion complete(const std::string& prompt, const GenerationParams& params,
                              int sample_index) = 0;
  virtual std::string client_id() const = 0;
  virtual std::string model() const = 0;
};

// Rule-driven fake. Script format (JSON):
//
//   {"model": "mock", "default": "...",
//    "rules": [{"contains": "CWE-78", "responses": ["a", "b"], "fail_first": 0,
//               "status": 503}]}
//
// The first rule whose `contains` substrings all occur in the prompt answers
// with responses[sample_index % size]. `fail_first` makes the first N calls
// for that rule throw a retryable ClientError (or a non-retryable one when
// `status` is a 4xx). No matching rule and no default is an error.
class ScriptedClient : public TextClient {
 public:
  explicit ScriptedClient(Json script);
  static std::unique_ptr<ScriptedClient> from_file(const std::filesystem::path& path);

  Completion complete(const std::string& prompt, const GenerationParams& params,
                      int sample_index) override;
  std::string client_id() const override { return "scripted-mock"; }
  std::string model() const override { return model_; }

  long calls() const { return calls_.load(); }

 private:
  struct Rule {
    std::vector<std::string> contains;
    std::vector<std::string> responses;
    int fail_first = 0;
    int status = 503;
    int failures = 0;
  };

  std::string model_;
  std::optional<std::string> default_;
  std::vector<Rule> rules_;
  std::mutex mu_;
  std::atomic<long> calls_{0};
};

struct HttpOptions {
  std::string base_url;  // e.g. https://api.example.com/v1
  std::string api_key;
  std::string model;
  int timeout_seconds = 120;
};

// Reads FORGE_API_BASE and FORGE_API_KEY. nullopt when either is unset.
std::optional<HttpOptions> http_options_from_env(std::string model);

// OpenAI-compatible chat-completions endpoint.
class HttpClient : public TextClient {
 public:
  explicit HttpClient(HttpOptions options);
  Completion complete(const std::string& prompt, const GenerationParams& params,
                      int sample_index) override;
  std::string client_id() const override { return "http-openai-compatible"; }
  std::string model() const override { return options_.model; }

 private:
  HttpOptions options_;
};

struct RetryPolicy {
  int retries = 3;  // total attempts
  std::chrono::milliseconds base_delay{500};
  double multiplier = 2.0;
};

struct CacheStats {
  long hits = 0;
  long misses = 0;
  long attempts = 0;
  long prompt_tokens = 0;
  long completion_tokens = 0;
};

// Persistent content-addressed cache in front of another client. Entries are
// immutable JSON files under `dir`; writes go through rename so concurrent
// readers never see partial entries.
class CachingClient : public TextClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  CachingClient(TextClient& inner, std::filesystem::path dir, RetryPolicy policy = {},
                Sleeper sleeper = [](std::chrono::milliseconds d) {
                  std::this_thread::sleep_for(d);
                });

  Completion complete(const std::string& prompt, const GenerationParams& params,
                      int sample_index) override;
  std::string client_id() const override { return inner_.client_id(); }
  std::string model() const override { return inner_.model(); }

  std::string cache_key(const std::string& prompt, const GenerationParams& params,
                        int sample_index) const;
  CacheStats stats() const;

 private:
  std::filesystem::path entry_path(const std::string& key) const;

  TextClient& inner_;
  std::filesystem::path dir_;
  RetryPolicy policy_;
  Sleeper sleeper_;
  mutable std::mutex mu_;
  CacheStats stats_;
};

// Runs fn(i) for i in [0, n) on up to `max_inflight` threads. Results keep
// input order. The first exception (lowest index) is rethrown after all
// workers stop.
template <typename T>
std::vector<T> parallel_map(std::size_t n, int max_inflight,
                            const std::function<T(std::size_t)>& fn) {
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, max_inflight)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace forge::llm
