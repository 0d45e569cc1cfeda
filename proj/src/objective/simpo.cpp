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

#include "forge/error.hpp"
#include "forge/objective.hpp"

namespace forge::objective {

void to_json(Json& j, const PairLogProb& p) {
  j = Json{{"row_id", p.row_id},
           {"logp_w", p.logp_w},
           {"len_w", p.len_w},
           {"logp_l", p.logp_l},
           {"len_l", p.len_l}};
}

void from_json(const Json& j, PairLogProb& p) {
  p.row_id = j.at("row_id").get<std::string>();
  p.logp_w = j.at("logp_w").get<double>();
  p.len_w = j.at("len_w").get<long>();
  p.logp_l = j.at("logp_l").get<double>();
  p.len_l = j.at("len_l").get<long>();
}

double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double log_sigmoid(double x) { return -softplus(-x); }

namespace {

void check(const PairLogProb& p, double beta) {
  if (!(beta > 0)) throw ValidationError("beta must be > 0");
  if (p.len_w <= 0 || p.len_l <= 0) {
    throw ValidationError("row " + p.row_id + ": token lengths must be positive");
  }
}

double sigmoid(double x) {
  if (x >= 0) return 1 / (1 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1 + e);
}

}  // namespace

double simpo_margin(const PairLogProb& p, double beta, double gamma) {
  check(p, beta);
  return beta / static_cast<double>(p.len_w) * p.logp_w -
         beta / static_cast<double>(p.len_l) * p.logp_l - gamma;
}

double simpo_loss(const PairLogProb& p, double beta, double gamma) {
  return softplus(-simpo_margin(p, beta, gamma));
}

double simpo_grad_logp_w(const PairLogProb& p, double beta, double gamma) {
  const double m = simpo_margin(p, beta, gamma);
  return -(beta / static_cast<double>(p.len_w)) * sigmoid(-m);
}

void to_json(Json& j, const LossSummary& s) {
  j = Json{{"n", s.n},     {"mean", s.mean}, {"p10", s.p10},
           {"p50", s.p50}, {"p90", s.p90},   {"unnormalized", s.unnormalized}};
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

LossSummary dataset_loss(const std::vector<PairLogProb>& rows, double beta, double gamma) {
  if (rows.empty()) throw ValidationError("dataset_loss: no rows");
  LossSummary s;
  s.n = rows.size();
  std::vector<double> losses;
  losses.reserve(rows.size());
  double sum = 0;
  double comp = 0;
  for (const auto& r : rows) {
    const double l = simpo_loss(r, beta, gamma);
    losses.push_back(l);
    // Neumaier summation.
    const double t = sum + l;
    comp += std::abs(sum) >= std::abs(l) ? (sum - t) + l : (l - t) + sum;
    sum = t;
    if (r.logp_w > 0 || r.logp_l > 0) ++s.unnormalized;
  }
  s.mean = (sum + comp) / static_cast<double>(rows.size());
  std::sort(losses.begin(), losses.end());
  s.p10 = quantile_sorted(losses, 0.1);
  s.p50 = quantile_sorted(losses, 0.5);
  s.p90 = quantile_sorted(losses, 0.9);
  if (s.unnormalized > 0) {
    spdlog::warn("dataset_loss: {} rows carry positive log-probs", s.unnormalized);
  }
  return s;
}

std::vector<PairLogProb> load_pairlogprobs(const std::filesystem::path& path) {
  std::vector<PairLogProb> out;
  std::size_t line = 0;
  for (const auto& row : read_jsonl(path)) {
    ++line;
    try {
      auto p = row.get<PairLogProb>();
      if (p.len_w <= 0 || p.len_l <= 0) throw ValidationError("token lengths must be positive");
      if (!std::isfinite(p.logp_w) || !std::isfinite(p.logp_l)) {
        throw ValidationError("log-probs must be finite");
      }
      out.push_back(std::move(p));
    } catch (const Json::exception& e) {
      throw ValidationError(path.string() + " row " + std::to_string(line) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + " row " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace forge::objective
