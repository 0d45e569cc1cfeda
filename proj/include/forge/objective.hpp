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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "forge/io.hpp"

namespace forge::objective {

struct PairLogProb {
  std::string row_id;
  double logp_w = 0;  // summed log-prob of the chosen response
  long len_w = 1;     // its token count
  double logp_l = 0;
  long len_l = 1;
};

void to_json(Json& j, const PairLogProb& p);
void from_json(const Json& j, PairLogProb& p);

// log(1 + exp(x)) without overflow or cancellation.
double softplus(double x);
double log_sigmoid(double x);

// (beta/len_w) logp_w - (beta/len_l) logp_l - gamma
double simpo_margin(const PairLogProb& p, double beta, double gamma);

// -log sigmoid(margin). Throws ValidationError for beta <= 0 or a
// non-positive length.
double simpo_loss(const PairLogProb& p, double beta, double gamma);

// d loss / d logp_w.
double simpo_grad_logp_w(const PairLogProb& p, double beta, double gamma);

struct LossSummary {
  std::size_t n = 0;
  double mean = 0;
  double p10 = 0;
  double p50 = 0;
  double p90 = 0;
  // Rows with a positive log-prob, which no normalised model emits.
  std::size_t unnormalized = 0;
};

void to_json(Json& j, const LossSummary& s);

// Linear-interpolation quantile of sorted data (type 7).
double quantile_sorted(std::span<const double> sorted, double q);

LossSummary dataset_loss(const std::vector<PairLogProb>& rows, double beta, double gamma);

// pairlogprobs.jsonl. Rows with bad lengths are rejected with their line.
std::vector<PairLogProb> load_pairlogprobs(const std::filesystem::path& path);

}  // namespace forge::objective
