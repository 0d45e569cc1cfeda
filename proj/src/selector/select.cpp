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
#include <random>
#include <set>

#include "forge/selector.hpp"

namespace forge::selector {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

const prefs::CodeSample& sample(const prefs::SampleStore& samples, const std::string& id,
                                const std::string& owner) {
  auto it = samples.find(id);
  if (it == samples.end()) {
    throw ValidationError("triple " + owner + " references unknown sample " + id);
  }
  return it->second;
}

}  // namespace

void to_json(Json& j, const FilterReport& r) {
  j = Json{{"input", r.input},
           {"kept", r.kept},
           {"dropped", {{"syntax", r.syntax},
                        {"keyword", r.keyword},
                        {"short", r.short_code},
                        {"dedup", r.dedup}}}};
}

void to_json(Json& j, const SelectReport& r) {
  j = Json{{"candidates", r.candidates}, {"after_top_k", r.after_top_k},
           {"discarded", r.discarded},   {"kept", r.kept},
           {"orphans", r.orphans}};
}

int non_blank_lines(std::string_view text) {
  int count = 0;
  bool content = false;
  for (char c : text) {
    if (c == '\n') {
      count += content ? 1 : 0;
      content = false;
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      content = true;
    }
  }
  return count + (content ? 1 : 0);
}

std::vector<prefs::SecTriple> heuristic_filter_sec(const std::vector<prefs::SecTriple>& candidates,
                                                   const prefs::SampleStore& samples,
                                                   const FilterThresholds& thresholds,
                                                   FilterReport* report) {
  if (thresholds.dedup_ratio < 0 || thresholds.dedup_ratio > 100) {
    throw ValidationError("dedup_ratio must be within 0..100");
  }
  std::vector<prefs::SecTriple> sorted = candidates;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::vector<std::string> keywords;
  for (const auto& k : thresholds.skip_keywords) keywords.push_back(lower(k));

  FilterReport r;
  r.input = sorted.size();
  std::vector<prefs::SecTriple> kept;
  std::vector<std::vector<char32_t>> kept_fixes;
  for (const auto& t : sorted) {
    const auto& y_f = sample(samples, t.y_f, t.id);
    const auto& y_v = sample(samples, t.y_v, t.id);
    if (!oracle::syntax_check(y_f.text, t.pair.language).ok ||
        !oracle::syntax_check(y_v.text, t.pair.language).ok) {
      ++r.syntax;
      continue;
    }
    const std::string fixed = lower(y_f.text);
    if (std::any_of(keywords.begin(), keywords.end(),
                    [&](const std::string& k) { return fixed.find(k) != std::string::npos; })) {
      ++r.keyword;
      continue;
    }
    if (non_blank_lines(y_f.text) < thresholds.min_lines) {
      ++r.short_code;
      continue;
    }
    auto cps = code_points(y_f.text);
    bool duplicate = false;
    for (const auto& other : kept_fixes) {
      const std::size_t longest = std::max(cps.size(), other.size());
      if (longest == 0) {
        duplicate = true;
        break;
      }
      // The length gap bounds the distance from below.
      const std::size_t gap = longest - std::min(cps.size(), other.size());
      if (static_cast<int>((200 * (longest - gap) + longest) / (2 * longest)) <
          thresholds.dedup_ratio) {
        continue;
      }
      const std::size_t d = levenshtein(std::span<const char32_t>(cps),
                                        std::span<const char32_t>(other));
      if (static_cast<int>((200 * (longest - d) + longest) / (2 * longest)) >=
          thresholds.dedup_ratio) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) {
      ++r.dedup;
      continue;
    }
    kept.push_back(t);
    kept_fixes.push_back(std::move(cps));
  }
  r.kept = kept.size();
  if (report) *report = r;
  return kept;
}

std::vector<prefs::NormTriple> select_norm(const std::vector<prefs::NormTriple>& candidates,
                                           const std::map<std::string, InfluenceScore>& scores,
                                           int top_k, double discard_quantile,
                                           SelectReport* report) {
  if (top_k < 0) throw ValidationError("top_k must be >= 0");
  if (!(discard_quantile >= 0 && discard_quantile < 1)) {
    throw ValidationError("discard quantile must be within [0, 1)");
  }
  struct Scored {
    const prefs::NormTriple* triple;
    double score;
  };
  std::map<std::string, std::vector<Scored>> by_sec;
  for (const auto& c : candidates) {
    auto it = scores.find(c.id);
    if (it == scores.end()) throw ValidationError("select_norm: no score for " + c.id);
    by_sec[c.sec_link].push_back({&c, it->second.score});
  }

  std::vector<Scored> kept;
  for (auto& [sec, group] : by_sec) {
    std::sort(group.begin(), group.end(), [](const Scored& a, const Scored& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.triple->id < b.triple->id;
    });
    for (std::size_t i = 0; i < group.size() && i < static_cast<std::size_t>(top_k); ++i) {
      kept.push_back(group[i]);
    }
  }
  const std::size_t after_top_k = kept.size();
  const auto drop = static_cast<std::size_t>(
      std::floor(discard_quantile * static_cast<double>(after_top_k)));
  std::sort(kept.begin(), kept.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.triple->id > b.triple->id;
  });
  std::set<std::string> before;
  for (const auto& s : kept) before.insert(s.triple->sec_link);
  kept.erase(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(drop));
  std::set<std::string> after;
  for (const auto& s : kept) after.insert(s.triple->sec_link);

  std::vector<prefs::NormTriple> out;
  for (const auto& s : kept) out.push_back(*s.triple);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  SelectReport r;
  r.candidates = candidates.size();
  r.after_top_k = after_top_k;
  r.discarded = drop;
  r.kept = out.size();
  r.orphans = before.size() - after.size();
  if (r.orphans > 0) spdlog::info("select: {} SecTriples lost every companion", r.orphans);
  if (report) *report = r;
  return out;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    // Unbiased draw from [0, i).
    const std::uint64_t bound = i;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
      r = rng();
    } while (r >= limit);
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(r % bound)]);
  }
  return idx;
}

FinalizeResult finalize(const std::vector<prefs::SecTriple>& dsec,
                        const std::vector<prefs::NormTriple>& dnorm,
                        const prefs::SampleStore& samples,
                        const prefs::InstructionStore& instructions, std::uint64_t seed) {
  auto instr = [&](const std::string& id, const std::string& owner) -> const Instruction& {
    auto it = instructions.find(id);
    if (it == instructions.end()) {
      throw ValidationError("triple " + owner + " references unknown instruction " + id);
    }
    return it->second;
  };
  if (dsec.empty()) spdlog::warn("finalize: D_sec* is empty");
  if (dnorm.empty()) spdlog::warn("finalize: D_norm* is empty");

  std::vector<prefs::SecTriple> sec = dsec;
  std::sort(sec.begin(), sec.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::vector<prefs::NormTriple> norm = dnorm;
  std::sort(norm.begin(), norm.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  std::vector<Json> ordered;
  for (const auto& t : sec) {
    ordered.push_back(Json{{"id", t.id},
                           {"prompt", instr(t.x_v, t.id).text},
                           {"chosen", sample(samples, t.y_f, t.id).text},
                           {"rejected", sample(samples, t.y_v, t.id).text},
                           {"source", "sec"},
                           {"language", t.pair.language},
                           {"cwe", t.pair.cwe},
                           {"links", {{"x_v", t.x_v}, {"y_f", t.y_f}, {"y_v", t.y_v}}}});
  }
  for (const auto& t : norm) {
    ordered.push_back(Json{{"id", t.id},
                           {"prompt", instr(t.x_n, t.id).text},
                           {"chosen", sample(samples, t.y_n, t.id).text},
                           {"rejected", sample(samples, t.y_f, t.id).text},
                           {"source", "norm"},
                           {"links", {{"x_n", t.x_n},
                                      {"y_n", t.y_n},
                                      {"y_f", t.y_f},
                                      {"sec_link", t.sec_link}}}});
  }

  FinalizeResult out;
  for (std::size_t i : shuffled_indices(ordered.size(), seed)) out.rows.push_back(ordered[i]);
  const std::size_t total = out.rows.size();
  out.manifest = Json{{"schema_version", kSchemaVersion},
                      {"seed", seed},
                      {"rows", total},
                      {"sec", sec.size()},
                      {"norm", norm.size()},
                      {"norm_fraction", total == 0 ? 0.0
                                                   : static_cast<double>(norm.size()) /
                                                         static_cast<double>(total)}};
  return out;
}

}  // namespace forge::selector
