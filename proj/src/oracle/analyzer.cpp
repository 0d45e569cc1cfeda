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

#include "forge/oracle/analyzer.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include <spdlog/spdlog.h>

#include "forge/assets.hpp"
#include "forge/syntax/tree.hpp"

namespace forge::oracle {

namespace {

bool indented(std::string_view line) {
  return !line.empty() && (line[0] == ' ' || line[0] == '\t');
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string expand_defines(std::string_view text, const std::map<std::string, std::string>& defs,
                           std::string_view origin) {
  std::string out;
  for (std::size_t i = 0; i < text.size();) {
    const bool reference = text[i] == '$' && i + 1 < text.size() &&
                           (std::isalpha(static_cast<unsigned char>(text[i + 1])) || text[i + 1] == '_');
    if (!reference) {
      out += text[i++];
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
      ++j;
    }
    const std::string name(text.substr(i + 1, j - i - 1));
    auto it = defs.find(name);
    if (it == defs.end()) {
      throw ConfigError(std::string(origin) + ": undefined name $" + name);
    }
    out += it->second;
    i = j;
  }
  return out;
}

std::string ext_for(std::string_view language) {
  static const std::map<std::string, std::string, std::less<>> kExt = {
      {"python", ".py"}, {"javascript", ".js"}, {"java", ".java"}, {"c", ".c"}, {"cpp", ".cpp"}};
  auto it = kExt.find(language);
  return it == kExt.end() ? ".txt" : it->second;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

const std::regex& cwe_id_regex() {
  static const std::regex kRe("^CWE-[0-9]+$");
  return kRe;
}

}  // namespace

std::vector<Rule> parse_rule_pack(std::string_view text, const CwePair& pair,
                                  std::string_view origin) {
  const syntax::Grammar* grammar = syntax::find_grammar(pair.language);
  if (grammar == nullptr) {
    throw ConfigError(std::string(origin) + ": no grammar for " + pair.language);
  }
  std::vector<std::string_view> lines;
  for (std::size_t b = 0; b <= text.size();) {
    std::size_t e = text.find('\n', b);
    if (e == std::string_view::npos) e = text.size();
    lines.push_back(text.substr(b, e - b));
    b = e + 1;
  }

  std::map<std::string, std::string> defs;
  std::vector<Rule> rules;
  std::optional<Rule> current;
  auto where = [&](std::size_t k) { return std::string(origin) + ":" + std::to_string(k + 1); };
  auto block = [&](std::size_t& k) {
    std::string body;
    while (k + 1 < lines.size() && (indented(lines[k + 1]) || trim(lines[k + 1]).empty())) {
      body += lines[++k];
      body += '\n';
    }
    return body;
  };
  auto finish = [&](std::size_t k) {
    if (!current) return;
    if (current->pattern.empty()) throw ConfigError(where(k) + ": rule " + current->rule_id + " has no pattern");
    if (current->message.empty()) current->message = current->rule_id;
    rules.push_back(std::move(*current));
    current.reset();
  };

  for (std::size_t k = 0; k < lines.size(); ++k) {
    const std::string_view line = trim(lines[k]);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t sp = line.find(' ');
    const std::string_view head = line.substr(0, sp);
    const std::string_view rest = sp == std::string_view::npos ? "" : trim(line.substr(sp));
    if (head == "define") {
      if (rest.empty()) throw ConfigError(where(k) + ": define needs a name");
      const std::size_t at = k;
      const std::string body = expand_defines(block(k), defs, where(at));
      defs[std::string(rest)] = std::string(trim(body));
    } else if (head == "rule") {
      finish(k);
      if (rest.empty()) throw ConfigError(where(k) + ": rule needs an id");
      current = Rule{std::string(rest), pair, {}, {}, {}};
    } else if (head == "message") {
      if (!current) throw ConfigError(where(k) + ": message outside a rule");
      current->message = std::string(rest);
    } else if (head == "pattern") {
      if (!current) throw ConfigError(where(k) + ": pattern outside a rule");
      const std::size_t at = k;
      current->pattern = std::string(trim(expand_defines(block(k), defs, where(at))));
      try {
        current->query = Query::compile(current->pattern, *grammar);
      } catch (const ConfigError& e) {
        throw ConfigError(where(at) + ": rule " + current->rule_id + ": " + e.what());
      }
    } else {
      throw ConfigError(where(k) + ": unexpected '" + std::string(head) + "'");
    }
  }
  finish(lines.size());
  return rules;
}

RuleSet::RuleSet(std::vector<Rule> rules) : rules_(std::move(rules)) {
  std::set<std::string> seen;
  for (const Rule& r : rules_) {
    if (!seen.insert(r.rule_id).second) throw ConfigError("duplicate rule id " + r.rule_id);
  }
}

RuleSet RuleSet::builtin() {
  static const RuleSet kBuiltin = [] {
    std::vector<Rule> all;
    for (const assets::Asset& a : assets::all()) {
      const std::filesystem::path p(a.name);
      if (p.extension() != ".rules") continue;
      const CwePair pair = make_cwe_pair(p.parent_path().filename().string(), p.stem().string());
      auto rules = parse_rule_pack(a.content, pair, a.name);
      std::move(rules.begin(), rules.end(), std::back_inserter(all));
    }
    return RuleSet(std::move(all));
  }();
  return kBuiltin;
}

RuleSet RuleSet::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("rules directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".rules") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Rule> all;
  for (const auto& f : files) {
    const CwePair pair = make_cwe_pair(f.parent_path().filename().string(), f.stem().string());
    auto rules = parse_rule_pack(read_text(f), pair, f.string());
    std::move(rules.begin(), rules.end(), std::back_inserter(all));
  }
  return RuleSet(std::move(all));
}

std::vector<Rule> RuleSet::for_language(std::string_view language) const {
  const std::string lang = normalize_language(language);
  std::vector<Rule> out;
  std::copy_if(rules_.begin(), rules_.end(), std::back_inserter(out),
               [&](const Rule& r) { return r.pair.language == lang; });
  return out;
}

std::set<CwePair> RuleSet::pairs() const {
  std::set<CwePair> out;
  for (const Rule& r : rules_) out.insert(r.pair);
  return out;
}

const Rule* RuleSet::find(std::string_view rule_id) const {
  for (const Rule& r : rules_) {
    if (r.rule_id == rule_id) return &r;
  }
  return nullptr;
}

bool is_secure(const AnalysisReport& report) { return report.findings.empty(); }

SyntaxResult syntax_check(std::string_view code, std::string_view language) {
  const syntax::Grammar* g = syntax::find_grammar(normalize_language(language));
  if (g == nullptr) throw ConfigError("no grammar registered for language '" + std::string(language) + "'");
  const syntax::Tree tree = g->parse(std::string(code));
  if (!tree.has_error()) return {};
  const auto& first = tree.issues().front();
  return {false, "line " + std::to_string(first.line) + ": " + first.message};
}

AnalysisReport analyze(std::string_view code, std::string_view language,
                       const std::vector<Rule>& rules) {
  const std::string lang = normalize_language(language);
  const syntax::Grammar* g = syntax::find_grammar(lang);
  if (g == nullptr) throw ConfigError("no grammar registered for language '" + std::string(language) + "'");
  const syntax::Tree tree = g->parse(std::string(code));

  AnalysisReport report;
  report.code_id = sha256_hex(code);
  report.analyzer = AnalyzerKind::kBuiltin;
  report.best_effort = tree.has_error();

  for (const Rule& rule : rules) {
    if (rule.pair.language != lang) continue;
    std::vector<Finding> found;
    try {
      for (syntax::NodeId n = 0; n < tree.size(); ++n) {
        auto caps = rule.query.match(tree, n);
        if (!caps) continue;
        const syntax::Node& node = tree.node(n);
        found.push_back({rule.pair, true, rule.rule_id,
                         render_message(rule.message, tree, *caps), node.start_line,
                         node.end_line});
      }
    } catch (const std::exception& e) {
      report.skipped_rules.push_back(rule.rule_id + ": " + e.what());
      continue;
    }
    std::move(found.begin(), found.end(), std::back_inserter(report.findings));
  }

  auto& fs = report.findings;
  std::stable_sort(fs.begin(), fs.end(), [](const Finding& a, const Finding& b) {
    return std::tie(a.start_line, a.rule_id, a.end_line) < std::tie(b.start_line, b.rule_id, b.end_line);
  });
  fs.erase(std::unique(fs.begin(), fs.end(),
                       [](const Finding& a, const Finding& b) {
                         return a.rule_id == b.rule_id && a.start_line == b.start_line &&
                                a.end_line == b.end_line;
                       }),
           fs.end());
  return report;
}

AnalysisReport BuiltinOracle::analyze(std::string_view code, std::string_view language) const {
  return oracle::analyze(code, language, rules_.rules());
}

ExternalAnalyzer::ExternalAnalyzer(ExternalOptions options) : options_(std::move(options)) {
  if (options_.cmd_template.find("{file}") == std::string::npos) {
    throw ConfigError("external analyzer command must contain {file}");
  }
  options_.max_concurrency = std::max(1, options_.max_concurrency);
}

AnalysisReport ExternalAnalyzer::run(std::string_view code, std::string_view language) const {
  {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return running_ < options_.max_concurrency; });
    ++running_;
  }
  struct Release {
    const ExternalAnalyzer* self;
    ~Release() {
      {
        std::lock_guard lock(self->mu_);
        --self->running_;
      }
      self->cv_.notify_one();
    }
  } release{this};

  const std::string lang = normalize_language(language);
  std::string code_path = (std::filesystem::temp_directory_path() / "forge-XXXXXX").string() + ext_for(lang);
  const int suffix = static_cast<int>(ext_for(lang).size());
  const int fd = ::mkstemps(code_path.data(), suffix);
  if (fd < 0) throw AnalyzerError("cannot create temporary file for external analyzer");
  ::close(fd);
  const std::string err_path = code_path + ".err";
  struct Cleanup {
    std::string a, b;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove(a, ec);
      std::filesystem::remove(b, ec);
    }
  } cleanup{code_path, err_path};
  {
    std::ofstream out(code_path, std::ios::binary);
    out << code;
  }

  std::string cmd = options_.cmd_template;
  for (std::size_t at = cmd.find("{file}"); at != std::string::npos; at = cmd.find("{file}", at)) {
    const std::string quoted = shell_quote(code_path);
    cmd.replace(at, 6, quoted);
    at += quoted.size();
  }
  cmd = "(" + cmd + ") 2>" + shell_quote(err_path);

  std::string output;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw AnalyzerError("cannot start external analyzer");
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  const int exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;

  Json parsed = Json::parse(output, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_array()) {
    std::string err;
    std::ifstream in(err_path);
    std::getline(in, err);
    throw AnalyzerError("external analyzer failed (exit " + std::to_string(exit_code) +
                        ") without JSON output" + (err.empty() ? "" : ": " + err));
  }

  AnalysisReport report;
  report.code_id = sha256_hex(code);
  report.analyzer = AnalyzerKind::kExternal;
  for (const Json& j : parsed) {
    try {
      Finding f;
      const std::string cwe = j.at("cwe").get<std::string>();
      f.pair.language = lang;
      f.pair.cwe = cwe;
      f.mapped = std::regex_match(cwe, cwe_id_regex()) &&
                 (options_.known_cwes.empty() || options_.known_cwes.count(cwe) > 0);
      f.rule_id = j.value("rule", std::string("external"));
      f.message = j.value("message", std::string());
      f.start_line = j.at("start_line").get<int>();
      f.end_line = j.value("end_line", f.start_line);
      if (f.start_line < 1 || f.end_line < f.start_line) {
        throw AnalyzerError("bad span " + std::to_string(f.start_line) + "-" + std::to_string(f.end_line));
      }
      report.findings.push_back(std::move(f));
    } catch (const Json::exception& e) {
      throw AnalyzerError(std::string("malformed external finding: ") + e.what());
    }
  }
  std::stable_sort(report.findings.begin(), report.findings.end(), [](const Finding& a, const Finding& b) {
    return std::tie(a.start_line, a.rule_id) < std::tie(b.start_line, b.rule_id);
  });
  return report;
}

AnalysisReport run_external(const std::string& cmd_template, std::string_view code,
                            std::string_view language) {
  return ExternalAnalyzer(ExternalOptions{cmd_template, {}, 1}).run(code, language);
}

void to_json(Json& j, const Finding& f) {
  j = Json{{"language", f.pair.language}, {"cwe", f.pair.cwe},          {"mapped", f.mapped},
           {"rule_id", f.rule_id},        {"message", f.message},       {"start_line", f.start_line},
           {"end_line", f.end_line}};
}

void to_json(Json& j, const AnalysisReport& r) {
  j = Json{{"code_id", r.code_id},
           {"findings", r.findings},
           {"analyzer", r.analyzer == AnalyzerKind::kBuiltin ? "builtin" : "external"},
           {"best_effort", r.best_effort},
           {"skipped_rules", r.skipped_rules}};
}

void from_json(const Json& j, Finding& f) {
  f.pair = CwePair{j.at("language").get<std::string>(), j.at("cwe").get<std::string>()};
  f.mapped = j.value("mapped", true);
  f.rule_id = j.at("rule_id").get<std::string>();
  f.message = j.value("message", std::string());
  f.start_line = j.value("start_line", 1);
  f.end_line = j.value("end_line", f.start_line);
}

void from_json(const Json& j, AnalysisReport& r) {
  r.code_id = j.at("code_id").get<std::string>();
  r.findings = j.at("findings").get<std::vector<Finding>>();
  r.analyzer = j.value("analyzer", std::string("builtin")) == "external" ? AnalyzerKind::kExternal
                                                                         : AnalyzerKind::kBuiltin;
  r.best_effort = j.value("best_effort", false);
  r.skipped_rules = j.value("skipped_rules", std::vector<std::string>());
}

}  // namespace forge::oracle
