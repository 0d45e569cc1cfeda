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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forge/error.hpp"
#include "forge/io.hpp"
#include "forge/prefs.hpp"

namespace forge::selector {

// ---- string similarity

// Edit distance over Unicode code points (malformed UTF-8 bytes count as one
// unit each). Bit-parallel, 64 rows per word.
std::size_t levenshtein(std::string_view a, std::string_view b);
std::size_t levenshtein(std::span<const char32_t> a, std::span<const char32_t> b);

std::vector<char32_t> code_points(std::string_view s);

// round(100 * (1 - lev / max_len)), halves rounded up; 100 for two empties.
int fuzzy_ratio(std::string_view a, std::string_view b);

// ---- rank correlation

struct TauResult {
  double tau = 0;
  // One side is entirely tied; tau is reported as 0.
  bool no_signal = false;
};

// Kendall tau-b in O(n log n). Throws ValidationError on a length mismatch,
// fewer than two points, or a NaN.
TauResult kendall_tau(std::span<const double> xs, std::span<const double> ys);

// ---- training dynamics

enum class TraceKind { kXnYn, kXnYf, kXvYf };
std::string_view to_string(TraceKind k);
TraceKind parse_trace_kind(std::string_view s);

struct DynamicsTrace {
  std::string subject_id;
  TraceKind kind = TraceKind::kXnYn;
  std::vector<std::pair<std::int64_t, double>> points;
};

class ScoringError : public Error {
 public:
  using Error::Error;
};

// All traces of one scoring run. Every trace shares one step grid.
class TraceSet {
 public:
  TraceSet() = default;
  // Throws ValidationError on non-finite values, repeated steps, or a grid
  // that differs between traces.
  explicit TraceSet(std::vector<DynamicsTrace> traces);

  // dynamics.jsonl: {"subject_id", "kind", "step", "value"} per row.
  static TraceSet load(const std::filesystem::path& path);
  static TraceSet from_rows(const std::vector<Json>& rows, std::string_view origin = "traces");

  const std::vector<std::int64_t>& grid() const { return grid_; }
  const DynamicsTrace* find(std::string_view subject_id, TraceKind kind) const;
  std::size_t size() const { return traces_.size(); }

 private:
  std::vector<DynamicsTrace> traces_;
  std::map<std::pair<std::string, TraceKind>, std::size_t, std::less<>> index_;
  std::vector<std::int64_t> grid_;
};

enum class Measure { kDefault, kMarginF, kDecreaseG };
std::string_view to_string(Measure m);
Measure parse_measure(std::string_view s);

struct InfluenceScore {
  std::string norm_id;
  std::string sec_id;
  double score = 0;
  Measure measure = Measure::kDefault;
  bool no_signal = false;
};

void to_json(Json& j, const InfluenceScore& s);
void from_json(const Json& j, InfluenceScore& s);

// r_xn_yn and r_xn_yf are looked up under the NormTriple id, r_xv_yf under
// its linked SecTriple id (then the NormTriple id).
InfluenceScore influence(const prefs::NormTriple& norm, const TraceSet& traces, Measure measure);

// ---- heuristic filtering of D_sec

struct FilterThresholds {
  int min_lines = 5;
  int dedup_ratio = 90;
  std::vector<std::string> skip_keywords{"remain unchanged", "rest of the code", "same as before"};
};

struct FilterReport {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t syntax = 0;
  std::size_t keyword = 0;
  std::size_t short_code = 0;
  std::size_t dedup = 0;
};

void to_json(Json& j, const FilterReport& r);

// Count of lines holding something other than whitespace.
int non_blank_lines(std::string_view text);

// Each dropped triple is charged to the first check it fails, in the order
// syntax, keyword, short, dedup. Output sorted by id.
std::vector<prefs::SecTriple> heuristic_filter_sec(const std::vector<prefs::SecTriple>& candidates,
                                                   const prefs::SampleStore& samples,
                                                   const FilterThresholds& thresholds,
                                                   FilterReport* report = nullptr);

// ---- D_norm selection

struct SelectReport {
  std::size_t candidates = 0;
  std::size_t after_top_k = 0;
  std::size_t discarded = 0;
  std::size_t kept = 0;
  // SecTriples left with no companion by the global discard.
  std::size_t orphans = 0;
};

void to_json(Json& j, const SelectReport& r);

// Per SecTriple the top_k scores (ties to the smaller id), then the lowest
// floor(q * kept) globally (ties drop the larger id). Output sorted by id.
std::vector<prefs::NormTriple> select_norm(const std::vector<prefs::NormTriple>& candidates,
                                           const std::map<std::string, InfluenceScore>& scores,
                                           int top_k, double discard_quantile,
                                           SelectReport* report = nullptr);

// ---- final mixture

struct FinalizeResult {
  std::vector<Json> rows;
  Json manifest;
};

// Rows {id, prompt, chosen, rejected, source, links}. Seeded Fisher-Yates
// over sec rows (by id) followed by norm rows (by id).
FinalizeResult finalize(const std::vector<prefs::SecTriple>& dsec,
                        const std::vector<prefs::NormTriple>& dnorm,
                        const prefs::SampleStore& samples,
                        const prefs::InstructionStore& instructions, std::uint64_t seed);

// Deterministic Fisher-Yates permutation of [0, n).
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

}  // namespace forge::selector
