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
#include <set>

#include "forge/prefs.hpp"
#include "forge/synth.hpp"

namespace forge::prefs {

std::string sample_id(std::string_view instruction_id, std::string_view text, std::int64_t seed,
                      int sample_index) {
  return content_hash(Json{{"instruction_id", instruction_id},
                           {"text", text},
                           {"seed", seed},
                           {"sample_index", sample_index}});
}

std::string sec_triple_id(std::string_view x_v, std::string_view y_f, std::string_view y_v) {
  return content_hash(Json{{"x_v", x_v}, {"y_f", y_f}, {"y_v", y_v}});
}

std::string norm_triple_id(std::string_view x_n, std::string_view y_n, std::string_view y_f,
                           std::string_view sec_link) {
  return content_hash(Json{{"x_n", x_n}, {"y_n", y_n}, {"y_f", y_f}, {"sec_link", sec_link}});
}

void to_json(Json& j, const CodeSample& s) {
  j = Json{{"id", s.id},
           {"instruction_id", s.instruction_id},
           {"text", s.text},
           {"language", s.language},
           {"gen", s.gen},
           {"sample_index", s.sample_index}};
  if (s.fix_of) j["fix_of"] = *s.fix_of;
  if (s.report) j["report"] = *s.report;
}

void from_json(const Json& j, CodeSample& s) {
  s.id = j.at("id").get<std::string>();
  s.instruction_id = j.at("instruction_id").get<std::string>();
  s.text = j.at("text").get<std::string>();
  s.language = j.at("language").get<std::string>();
  s.gen = j.at("gen").get<llm::GenerationParams>();
  s.sample_index = j.value("sample_index", 0);
  s.fix_of.reset();
  if (j.contains("fix_of")) s.fix_of = j["fix_of"].get<std::string>();
  s.report.reset();
  if (j.contains("report")) s.report = j["report"].get<oracle::AnalysisReport>();
}

void to_json(Json& j, const SecTriple& t) {
  j = Json{{"id", t.id},   {"x_v", t.x_v},   {"y_f", t.y_f},
           {"y_v", t.y_v}, {"pair", t.pair}, {"findings_fixed", t.findings_fixed}};
}

void from_json(const Json& j, SecTriple& t) {
  t.id = j.at("id").get<std::string>();
  t.x_v = j.at("x_v").get<std::string>();
  t.y_f = j.at("y_f").get<std::string>();
  t.y_v = j.at("y_v").get<std::string>();
  t.pair = j.at("pair").get<CwePair>();
  t.findings_fixed = j.value("findings_fixed", std::vector<std::string>());
}

void to_json(Json& j, const NormTriple& t) {
  j = Json{{"id", t.id}, {"x_n", t.x_n}, {"y_n", t.y_n}, {"y_f", t.y_f}, {"sec_link", t.sec_link}};
}

void from_json(const Json& j, NormTriple& t) {
  t.id = j.at("id").get<std::string>();
  t.x_n = j.at("x_n").get<std::string>();
  t.y_n = j.at("y_n").get<std::string>();
  t.y_f = j.at("y_f").get<std::string>();
  t.sec_link = j.at("sec_link").get<std::string>();
}

void to_json(Json& j, const BuildCounts& c) {
  j = Json{{"instructions", c.instructions},     {"samples", c.samples},
           {"invalid", c.invalid},               {"vulnerable", c.vulnerable},
           {"fix_requests", c.fix_requests},     {"fixes_retained", c.fixes_retained},
           {"no_secure_fix", c.no_secure_fix},   {"sec_triples", c.sec_triples},
           {"norm_links_empty", c.norm_links_empty}, {"norm_triples", c.norm_triples}};
}

std::optional<std::string> extract_code_block(std::string_view completion) {
  std::size_t pos = 0;
  while (pos < completion.size()) {
    const std::size_t open = completion.find("```", pos);
    if (open == std::string_view::npos) return std::nullopt;
    // The fence must start a line.
    if (open > 0 && completion[open - 1] != '\n') {
      pos = open + 3;
      continue;
    }
    std::size_t fence_len = 3;
    while (open + fence_len < completion.size() && completion[open + fence_len] == '`') ++fence_len;
    const std::size_t eol = completion.find('\n', open);
    if (eol == std::string_view::npos) return std::nullopt;
    const std::string fence(fence_len, '`');
    std::size_t search = eol + 1;
    for (;;) {
      const std::size_t close = completion.find(fence, search);
      if (close == std::string_view::npos) return std::nullopt;
      if (completion[close - 1] == '\n') {
        return std::string(completion.substr(eol + 1, close - eol - 1));
      }
      search = close + fence_len;
    }
  }
  return std::nullopt;
}

std::string response_prompt(const Instruction& instr, std::string_view language) {
  return synth::fill_template(synth::prompt_template("respond"),
                              {{"Task", instr.text}, {"LANG", synth::language_display(language)}});
}

std::string analyzer_feedback(const oracle::AnalysisReport& report) {
  std::string out;
  for (const auto& f : report.findings) {
    out += "- " + f.rule_id + " " + f.pair.cwe + " (line " + std::to_string(f.start_line) +
           "): " + f.message + "\n";
  }
  if (!out.empty()) out.pop_back();
  return out;
}

std::string fix_prompt(const Instruction& x_v, const CodeSample& y_v) {
  if (!y_v.report || y_v.report->findings.empty()) {
    throw ValidationError("fix request for " + y_v.id + " without findings");
  }
  std::string code = "\n```" + y_v.language + "\n" + y_v.text;
  if (code.back() != '\n') code += '\n';
  code += "```\n";
  return synth::fill_template(synth::prompt_template("fix"),
                              {{"Feedback from the static analyzer", analyzer_feedback(*y_v.report)},
                               {"Coding task", x_v.text},
                               {"Vulnerable code", code}});
}

namespace {

std::vector<CodeSample> collect(const std::string& prompt, const std::string& instruction_id,
                                std::string_view language, int n,
                                const llm::GenerationParams& params, llm::TextClient& client,
                                const std::optional<std::string>& fix_of) {
  std::vector<CodeSample> out;
  for (int i = 0; i < n; ++i) {
    std::string completion;
    try {
      completion = client.complete(prompt, params, i).text;
    } catch (const ClientError& e) {
      throw StageError(std::string("sampling failed: ") + e.what(), instruction_id);
    }
    auto code = extract_code_block(completion);
    if (!code || code->find_first_not_of(" \t\r\n") == std::string::npos) continue;
    CodeSample s;
    s.instruction_id = instruction_id;
    s.text = std::move(*code);
    s.language = std::string(language);
    s.gen = params;
    s.sample_index = i;
    s.fix_of = fix_of;
    s.id = sample_id(s.instruction_id, s.text, params.seed, i);
    out.push_back(std::move(s));
  }
  return out;
}

bool has_pair(const oracle::AnalysisReport& r, const CwePair& pair) {
  return std::any_of(r.findings.begin(), r.findings.end(),
                     [&](const oracle::Finding& f) { return f.mapped && f.pair == pair; });
}

}  // namespace

std::vector<CodeSample> sample_responses(const Instruction& instr, std::string_view language,
                                         int n, const llm::GenerationParams& params,
                                         llm::TextClient& client) {
  if (n < 1) throw ValidationError("sample count must be >= 1");
  return collect(response_prompt(instr, language), instr.id, language, n, params, client,
                 std::nullopt);
}

Partition partition_by_security(std::vector<CodeSample> samples, const oracle::Oracle& oracle) {
  Partition p;
  for (auto& s : samples) {
    if (!oracle::syntax_check(s.text, s.language).ok) {
      ++p.invalid;
      continue;
    }
    s.report = oracle.analyze(s.text, s.language);
    if (oracle::is_secure(*s.report)) {
      p.clean.push_back(std::move(s));
    } else {
      p.vulnerable.push_back(std::move(s));
    }
  }
  return p;
}

std::vector<CodeSample> request_fix(const Instruction& x_v, const CodeSample& y_v,
                                    const llm::GenerationParams& params,
                                    llm::TextClient& client, const oracle::Oracle& oracle) {
  auto fixes = collect(fix_prompt(x_v, y_v), x_v.id, y_v.language, params.n_samples, params,
                       client, y_v.id);
  return partition_by_security(std::move(fixes), oracle).clean;
}

SecBuild build_sec(const std::vector<Instruction>& instrs, const oracle::Oracle& oracle,
                   llm::TextClient& client, const BuildOptions& options) {
  std::vector<Instruction> sorted = instrs;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (const auto& x : sorted) {
    if (x.kind != InstructionKind::kVulnInducing || !x.pair) {
      throw ValidationError("build_sec: " + x.id + " is not vulnerability-inducing");
    }
  }

  struct Unit {
    std::vector<SecTriple> triples;
    std::vector<CodeSample> samples;
    BuildCounts counts;
  };
  auto units = llm::parallel_map<Unit>(sorted.size(), options.max_inflight, [&](std::size_t i) {
    const Instruction& x_v = sorted[i];
    const CwePair& pair = *x_v.pair;
    Unit u;
    auto drawn = sample_responses(x_v, pair.language, options.vuln_params.n_samples,
                                  options.vuln_params, client);
    u.counts.samples = drawn.size();
    Partition part = partition_by_security(std::move(drawn), oracle);
    u.counts.invalid = part.invalid;

    std::vector<CodeSample> wins;
    if (options.allow_clean_as_win) wins = part.clean;
    std::vector<std::pair<CodeSample, std::vector<CodeSample>>> found;
    for (auto& y_v : part.vulnerable) {
      if (!has_pair(*y_v.report, pair)) continue;
      ++u.counts.vulnerable;
      ++u.counts.fix_requests;
      auto fixes = request_fix(x_v, y_v, options.fix_params, client, oracle);
      if (fixes.empty()) ++u.counts.no_secure_fix;
      u.counts.fixes_retained += fixes.size();
      found.emplace_back(y_v, std::move(fixes));
    }

    std::map<std::string, SecTriple> triples;
    for (auto& [y_v, fixes] : found) {
      std::vector<std::string> rules;
      for (const auto& f : y_v.report->findings) rules.push_back(f.rule_id);
      std::sort(rules.begin(), rules.end());
      rules.erase(std::unique(rules.begin(), rules.end()), rules.end());
      auto add = [&](const CodeSample& y_f) {
        SecTriple t{sec_triple_id(x_v.id, y_f.id, y_v.id), x_v.id, y_f.id, y_v.id, pair, rules};
        triples.emplace(t.id, std::move(t));
      };
      for (const auto& y_f : fixes) add(y_f);
      for (const auto& y_f : wins) add(y_f);
    }
    for (auto& [id, t] : triples) {
      if (u.triples.size() >= static_cast<std::size_t>(options.max_pairs_per_instruction)) break;
      u.triples.push_back(t);
    }
    std::set<std::string> used;
    for (const auto& t : u.triples) {
      used.insert(t.y_f);
      used.insert(t.y_v);
    }
    for (auto& [y_v, fixes] : found) {
      if (used.count(y_v.id)) u.samples.push_back(y_v);
      for (auto& y_f : fixes) {
        if (used.count(y_f.id)) u.samples.push_back(y_f);
      }
    }
    for (auto& y_f : wins) {
      if (used.count(y_f.id)) u.samples.push_back(y_f);
    }
    return u;
  });

  SecBuild out;
  out.counts.instructions = sorted.size();
  for (auto& u : units) {
    for (auto& t : u.triples) out.triples.push_back(std::move(t));
    for (auto& s : u.samples) out.samples.emplace(s.id, std::move(s));
    out.counts.samples += u.counts.samples;
    out.counts.invalid += u.counts.invalid;
    out.counts.vulnerable += u.counts.vulnerable;
    out.counts.fix_requests += u.counts.fix_requests;
    out.counts.fixes_retained += u.counts.fixes_retained;
    out.counts.no_secure_fix += u.counts.no_secure_fix;
  }
  std::sort(out.triples.begin(), out.triples.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  out.counts.sec_triples = out.triples.size();
  return out;
}

NormBuild build_norm(const std::vector<SecTriple>& sec, const InstructionStore& instructions,
                     const oracle::Oracle& oracle, llm::TextClient& client,
                     const BuildOptions& options) {
  std::vector<std::string> orphans;
  // (x_n id, language) -> linked SecTriples
  std::map<std::pair<std::string, std::string>, std::vector<const SecTriple*>> groups;
  for (const auto& t : sec) {
    auto xv = instructions.find(t.x_v);
    if (xv == instructions.end() || !xv->second.origin_id ||
        !instructions.count(*xv->second.origin_id)) {
      orphans.push_back(t.id);
      continue;
    }
    groups[{*xv->second.origin_id, t.pair.language}].push_back(&t);
  }
  if (!orphans.empty()) {
    std::string list;
    for (const auto& o : orphans) list += (list.empty() ? "" : ", ") + o;
    throw ValidationError("build_norm: SecTriples without a resolvable normal instruction: " +
                          list);
  }

  std::vector<std::pair<std::pair<std::string, std::string>, std::vector<const SecTriple*>>>
      work(groups.begin(), groups.end());
  struct Unit {
    std::vector<NormTriple> triples;
    std::vector<CodeSample> samples;
    BuildCounts counts;
  };
  auto units = llm::parallel_map<Unit>(work.size(), options.max_inflight, [&](std::size_t i) {
    const auto& [key, links] = work[i];
    const Instruction& x_n = instructions.at(key.first);
    Unit u;
    auto drawn = sample_responses(x_n, key.second, options.norm_params.n_samples,
                                  options.norm_params, client);
    u.counts.samples = drawn.size();
    Partition part = partition_by_security(std::move(drawn), oracle);
    u.counts.invalid = part.invalid;
    u.counts.vulnerable = part.vulnerable.size();
    std::set<std::string> used;
    for (const SecTriple* t : links) {
      std::vector<NormTriple> mine;
      for (const auto& y_n : part.clean) {
        mine.push_back(NormTriple{norm_triple_id(x_n.id, y_n.id, t->y_f, t->id), x_n.id, y_n.id,
                                  t->y_f, t->id});
      }
      std::sort(mine.begin(), mine.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
      if (mine.size() > static_cast<std::size_t>(options.max_norm_per_sec)) {
        mine.resize(static_cast<std::size_t>(options.max_norm_per_sec));
      }
      if (mine.empty()) ++u.counts.norm_links_empty;
      for (auto& n : mine) {
        used.insert(n.y_n);
        u.triples.push_back(std::move(n));
      }
    }
    for (auto& s : part.clean) {
      if (used.count(s.id)) u.samples.push_back(std::move(s));
    }
    return u;
  });

  NormBuild out;
  out.counts.instructions = work.size();
  for (auto& u : units) {
    for (auto& t : u.triples) out.triples.push_back(std::move(t));
    for (auto& s : u.samples) out.samples.emplace(s.id, std::move(s));
    out.counts.samples += u.counts.samples;
    out.counts.invalid += u.counts.invalid;
    out.counts.vulnerable += u.counts.vulnerable;
    out.counts.norm_links_empty += u.counts.norm_links_empty;
  }
  std::sort(out.triples.begin(), out.triples.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  out.counts.norm_triples = out.triples.size();
  return out;
}

}  // namespace forge::prefs
