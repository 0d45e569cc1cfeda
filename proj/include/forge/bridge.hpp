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
#include <optional>
#include <string>
#include <vector>

#include "forge/objective.hpp"
#include "forge/prefs.hpp"
#include "forge/selector.hpp"

// File contracts shared with the external trainer: the preference rows it
// trains on, the subjects it scores, and what it hands back.
namespace forge::bridge {

// Problems with final-prefs rows; empty when every row conforms. With
// `only_source` set, rows of any other source are reported.
std::vector<std::string> validate_pref_rows(const std::vector<Json>& rows,
                                            const std::optional<std::string>& only_source = {});

// trace-subjects.jsonl: {norm_id, sec_id, x_n, y_n, y_f, x_v} with texts.
std::vector<Json> trace_subjects(const std::vector<prefs::NormTriple>& dnorm,
                                 const std::vector<prefs::SecTriple>& dsec,
                                 const prefs::SampleStore& samples,
                                 const prefs::InstructionStore& instructions);

struct Grid {
  std::int64_t steps = 1000;
  std::int64_t checkpoint_every = 100;
};

// {every, 2 * every, ..., steps}. Throws ValidationError unless `every`
// divides `steps`.
std::vector<std::int64_t> checkpoint_grid(const Grid& grid);

// Every subject needs all three trace kinds; with `grid` the step grid must
// match it exactly.
std::vector<std::string> validate_dynamics(const selector::TraceSet& traces,
                                           const std::vector<Json>& subjects,
                                           const std::optional<Grid>& grid = {});

// One pair row per preference row, keyed by row id.
std::vector<std::string> validate_pairlogprobs(const std::vector<objective::PairLogProb>& pairs,
                                               const std::vector<Json>& pref_rows);

}  // namespace forge::bridge
