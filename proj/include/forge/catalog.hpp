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

#include <compare>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "forge/io.hpp"

namespace forge {

// Languages the pipeline knows how to target. Aliases ("py", "js") are
// normalised on load.
const std::set<std::string>& known_languages();
std::string normalize_language(std::string_view tag);

struct CwePair {
  std::string language;
  std::string cwe;  // "CWE-<n>"

  int cwe_number() const;
  std::string key() const { return language + "/" + cwe; }

  friend bool operator==(const CwePair&, const CwePair&) = default;
  // Language first, then numeric CWE id.
  friend std::strong_ordering operator<=>(const CwePair& a, const CwePair& b);
};

// Throws ValidationError unless `language` is known and `cwe` is CWE-<digits>.
CwePair make_cwe_pair(std::string_view language, std::string_view cwe);

struct ScenarioRecord {
  CwePair pair;
  std::string scenario_text;
  std::string source_prompt_hash;
  int sample_index = 0;

  friend bool operator==(const ScenarioRecord&, const ScenarioRecord&) = default;
};

enum class InstructionKind { kNormal, kVulnInducing };

struct Instruction {
  std::string id;
  InstructionKind kind = InstructionKind::kNormal;
  std::string text;
  std::optional<CwePair> pair;
  std::optional<std::string> origin_id;
  // Seed language tag; not part of the identity.
  std::optional<std::string> language;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

std::string instruction_id(InstructionKind kind, std::string_view text,
                           const std::optional<CwePair>& pair,
                           const std::optional<std::string>& origin_id);

Instruction make_normal_instruction(std::string text,
                                    std::optional<std::string> language = {});
// Throws ValidationError if `origin` is not a normal instruction.
Instruction make_vuln_instruction(std::string text, const CwePair& pair,
                                  const Instruction& origin);

// Checks the kind/pair/origin invariants.
void validate(const Instruction& instr);

void to_json(Json& j, const CwePair& p);
void from_json(const Json& j, CwePair& p);
void to_json(Json& j, const ScenarioRecord& r);
void from_json(const Json& j, ScenarioRecord& r);
void to_json(Json& j, const Instruction& i);
void from_json(const Json& j, Instruction& i);

// Reads a TOML file with a `targets` array of {language, cwe} tables.
// Deduplicated and sorted.
std::vector<CwePair> load_cwe_targets(const std::filesystem::path& config_path);

struct SeedLoadStats {
  std::size_t rows = 0;
  std::size_t skipped_missing_text = 0;
  std::size_t duplicates = 0;
};

// seeds.jsonl rows: {"id"?: str, "text": str, "lang"?: str}. Rows without
// text are skipped and counted; identical content collapses to one id.
std::vector<Instruction> load_seed_instructions(const std::filesystem::path& path,
                                                SeedLoadStats* stats = nullptr);

std::vector<Instruction> load_instructions(const std::filesystem::path& path);
void save_instructions(const std::filesystem::path& path,
                       const std::vector<Instruction>& instrs);

}  // namespace forge
