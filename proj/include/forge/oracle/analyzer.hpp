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

#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "forge/catalog.hpp"
#include "forge/error.hpp"
#include "forge/io.hpp"
#include "forge/oracle/query.hpp"

namespace forge::oracle {

struct Rule {
  std::string rule_id;
  CwePair pair;
  std::string pattern;
  std::string message;
  Query query;
};

// Parses a rule pack:
//
//   define NAME          ; indented pattern text, referenced as $NAME
//   rule <id>
//   message <template>   ; {capture} placeholders
//   pattern              ; indented pattern text
//
// Lines starting with `#` are comments. Throws ConfigError naming `origin`.
std::vector<Rule> parse_rule_pack(std::string_view text, const CwePair& pair,
                                  std::string_view origin);

class RuleSet {
 public:
  RuleSet() = default;
  explicit RuleSet(std::vector<Rule> rules);

  // Packs compiled into the binary.
  static RuleSet builtin();
  // Every `<dir>/<lang>/<cwe>.rules`.
  static RuleSet load_dir(const std::filesystem::path& dir);

  const std::vector<Rule>& rules() const { return rules_; }
  std::vector<Rule> for_language(std::string_view language) const;
  std::set<CwePair> pairs() const;
  const Rule* find(std::string_view rule_id) const;

 private:
  std::vector<Rule> rules_;
};

struct Finding {
  CwePair pair;
  // False for external findings whose CWE is not a known id.
  bool mapped = true;
  std::string rule_id;
  std::string message;
  int start_line = 1;
  int end_line = 1;
};

enum class AnalyzerKind { kBuiltin, kExternal };

struct AnalysisReport {
  std::string code_id;
  std::vector<Finding> findings;
  AnalyzerKind analyzer = AnalyzerKind::kBuiltin;
  // Set when the code did not parse cleanly.
  bool best_effort = false;
  // "<rule_id>: <reason>" for rules that failed while matching.
  std::vector<std::string> skipped_rules;
};

bool is_secure(const AnalysisReport& report);

struct SyntaxResult {
  bool ok = true;
  std::string detail;
};

// Throws ConfigError for a language without a grammar.
SyntaxResult syntax_check(std::string_view code, std::string_view language);

AnalysisReport analyze(std::string_view code, std::string_view language,
                       const std::vector<Rule>& rules);

class AnalyzerError : public Error {
 public:
  using Error::Error;
};

struct ExternalOptions {
  // Shell command; `{file}` is replaced by the path of the code under test.
  std::string cmd_template;
  // When non-empty, CWE ids outside this set are reported as unmapped.
  std::set<std::string> known_cwes;
  int max_concurrency = 4;
};

// Runs an external analyzer that prints a JSON array of findings.
class ExternalAnalyzer {
 public:
  explicit ExternalAnalyzer(ExternalOptions options);
  AnalysisReport run(std::string_view code, std::string_view language) const;

 private:
  ExternalOptions options_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  mutable int running_ = 0;
};

AnalysisReport run_external(const std::string& cmd_template, std::string_view code,
                            std::string_view language);

// Either analyzer behind one call; what the pipeline uses as its oracle.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual AnalysisReport analyze(std::string_view code, std::string_view language) const = 0;
};

class BuiltinOracle : public Oracle {
 public:
  explicit BuiltinOracle(RuleSet rules) : rules_(std::move(rules)) {}
  AnalysisReport analyze(std::string_view code, std::string_view language) const override;
  const RuleSet& rules() const { return rules_; }

 private:
  RuleSet rules_;
};

class ExternalOracle : public Oracle {
 public:
  explicit ExternalOracle(ExternalOptions options) : analyzer_(std::move(options)) {}
  AnalysisReport analyze(std::string_view code, std::string_view language) const override {
    return analyzer_.run(code, language);
  }

 private:
  ExternalAnalyzer analyzer_;
};

void to_json(Json& j, const Finding& f);
void to_json(Json& j, const AnalysisReport& r);
void from_json(const Json& j, Finding& f);
void from_json(const Json& j, AnalysisReport& r);

}  // namespace forge::oracle
