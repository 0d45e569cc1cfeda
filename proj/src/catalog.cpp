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

#include "forge/catalog.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <regex>
#include <unordered_set>

#include "forge/error.hpp"
#include "toml.hpp"

namespace forge {

const std::set<std::string>& known_languages() {
  static const std::set<std::string> kLanguages = {"c", "cpp", "java",
                                                   "javascript", "python"};
  return kLanguages;
}

std::string normalize_language(std::string_view tag) {
  std::string lower(tag);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "py" || lower == "python3") return "python";
  if (lower == "js" || lower == "node" || lower == "nodejs") return "javascript";
  if (lower == "c++" || lower == "cxx") return "cpp";
  return lower;
}

int CwePair::cwe_number() const {
  int n = 0;
  std::from_chars(cwe.data() + 4, cwe.data() + cwe.size(), n);
  return n;
}

std::strong_ordering operator<=>(const CwePair& a, const CwePair& b) {
  if (auto c = a.language <=> b.language; c != 0) return c;
  if (auto c = a.cwe_number() <=> b.cwe_number(); c != 0) return c;
  return a.cwe <=> b.cwe;
}

CwePair make_cwe_pair(std::string_view language, std::string_view cwe) {
  static const std::regex kCwe("^CWE-[0-9]+$");
  std::string lang = normalize_language(language);
  if (!known_languages().contains(lang)) {
    throw ValidationError("unknown language '" + std::string(language) + "'");
  }
  std::string id(cwe);
  if (!std::regex_match(id, kCwe)) {
    throw ValidationError("malformed CWE identifier '" + id + "'");
  }
  return CwePair{lang, id};
}

std::string instruction_id(InstructionKind kind, std::string_view text,
                           const std::optional<CwePair>& pair,
                           const std::optional<std::string>& origin_id) {
  Json j{{"kind", kind == InstructionKind::kNormal ? "normal" : "vuln_inducing"},
         {"text", text}};
  if (pair) j["pair"] = *pair;
  if (origin_id) j["origin_id"] = *origin_id;
  return content_hash(j);
}

Instruction make_normal_instruction(std::string text,
                                    std::optional<std::string> language) {
  Instruction i;
  i.kind = InstructionKind::kNormal;
  i.text = std::move(text);
  i.language = std::move(language);
  i.id = instruction_id(i.kind, i.text, std::nullopt, std::nullopt);
  return i;
}

Instruction make_vuln_instruction(std::string text, const CwePair& pair,
                                  const Instruction& origin) {
  if (origin.kind != InstructionKind::kNormal) {
    throw ValidationError("compose origin " + origin.id + " is not a normal instruction");
  }
  Instruction i;
  i.kind = InstructionKind::kVulnInducing;
  i.text = std::move(text);
  i.pair = pair;
  i.origin_id = origin.id;
  i.id = instruction_id(i.kind, i.text, i.pair, i.origin_id);
  return i;
}

void validate(const Instruction& instr) {
  if (instr.kind == InstructionKind::kVulnInducing) {
    if (!instr.pair || !instr.origin_id) {
      throw ValidationError("vuln_inducing instruction " + instr.id +
                            " lacks pair or origin_id");
    }
  } else if (instr.pair) {
    throw ValidationError("normal instruction " + instr.id + " carries a pair");
  }
  if (instr.id != instruction_id(instr.kind, instr.text, instr.pair, instr.origin_id)) {
    throw ValidationError("instruction id " + instr.id + " does not match its content");
  }
}

void to_json(Json& j, const CwePair& p) {
  j = Json{{"language", p.language}, {"cwe", p.cwe}};
}

void from_json(const Json& j, CwePair& p) {
  p = make_cwe_pair(j.at("language").get<std::string>(), j.at("cwe").get<std::string>());
}

void to_json(Json& j, const ScenarioRecord& r) {
  j = Json{{"pair", r.pair},
           {"scenario_text", r.scenario_text},
           {"source_prompt_hash", r.source_prompt_hash},
           {"sample_index", r.sample_index}};
}

void from_json(const Json& j, ScenarioRecord& r) {
  r.pair = j.at("pair").get<CwePair>();
  r.scenario_text = j.at("scenario_text").get<std::string>();
  r.source_prompt_hash = j.at("source_prompt_hash").get<std::string>();
  r.sample_index = j.at("sample_index").get<int>();
  if (r.scenario_text.empty()) throw ValidationError("empty scenario_text");
}

void to_json(Json& j, const Instruction& i) {
  j = Json{{"id", i.id},
           {"kind", i.kind == InstructionKind::kNormal ? "normal" : "vuln_inducing"},
           {"text", i.text}};
  if (i.pair) j["pair"] = *i.pair;
  if (i.origin_id) j["origin_id"] = *i.origin_id;
  if (i.language) j["lang"] = *i.language;
}

void from_json(const Json& j, Instruction& i) {
  i.id = j.at("id").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "normal") {
    i.kind = InstructionKind::kNormal;
  } else if (kind == "vuln_inducing") {
    i.kind = InstructionKind::kVulnInducing;
  } else {
    throw ValidationError("unknown instruction kind '" + kind + "'");
  }
  i.text = j.at("text").get<std::string>();
  i.pair = j.contains("pair") ? std::optional(j["pair"].get<CwePair>()) : std::nullopt;
  i.origin_id = j.contains("origin_id")
                    ? std::optional(j["origin_id"].get<std::string>())
                    : std::nullopt;
  i.language = j.contains("lang") ? std::optional(j["lang"].get<std::string>())
                                  : std::nullopt;
  validate(i);
}

std::vector<CwePair> load_cwe_targets(const std::filesystem::path& config_path) {
  toml::table table;
  try {
    table = toml::parse_file(config_path.string());
  } catch (const toml::parse_error& e) {
    throw ConfigError(config_path.string() + ": " + std::string(e.description()));
  }
  const auto* targets = table["targets"].as_array();
  if (!targets) throw ConfigError(config_path.string() + ": missing [[targets]]");

  std::vector<CwePair> pairs;
  for (size_t row = 0; row < targets->size(); ++row) {
    const auto* t = (*targets)[row].as_table();
    auto where = config_path.string() + ": targets[" + std::to_string(row) + "]";
    if (!t) throw ValidationError(where + ": expected a table");
    auto lang = (*t)["language"].value<std::string>();
    auto cwe = (*t)["cwe"].value<std::string>();
    if (!lang || !cwe) throw ValidationError(where + ": needs language and cwe");
    try {
      pairs.push_back(make_cwe_pair(*lang, *cwe));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

std::vector<Instruction> load_seed_instructions(const std::filesystem::path& path,
                                                SeedLoadStats* stats) {
  SeedLoadStats local;
  std::vector<Instruction> out;
  std::unordered_set<std::string> seen;
  for (const auto& row : read_jsonl(path)) {
    ++local.rows;
    if (!row.is_object() || !row.contains("text") || !row["text"].is_string() ||
        row["text"].get<std::string>().empty()) {
      ++local.skipped_missing_text;
      continue;
    }
    std::optional<std::string> lang;
    if (row.contains("lang") && row["lang"].is_string()) {
      lang = normalize_language(row["lang"].get<std::string>());
    }
    auto instr = make_normal_instruction(row["text"].get<std::string>(), lang);
    if (!seen.insert(instr.id).second) {
      ++local.duplicates;
      continue;
    }
    out.push_back(std::move(instr));
  }
  if (local.skipped_missing_text > 0) {
    spdlog::warn("{}: skipped {} of {} rows without text", path.string(),
                 local.skipped_missing_text, local.rows);
  }
  if (stats) *stats = local;
  return out;
}

std::vector<Instruction> load_instructions(const std::filesystem::path& path) {
  std::vector<Instruction> out;
  for (const auto& row : read_jsonl(path)) out.push_back(row.get<Instruction>());
  return out;
}

void save_instructions(const std::filesystem::path& path,
                       const std::vector<Instruction>& instrs) {
  std::vector<Json> rows;
  rows.reserve(instrs.size());
  for (const auto& i : instrs) rows.emplace_back(i);
  write_jsonl_atomic(path, rows);
  write_schema_sidecar(path, rows.size());
}

}  // namespace forge
