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

#include <algorithm>
#include <cmath>

#include "forge/selector.hpp"

namespace forge::selector {

std::string_view to_string(TraceKind k) {
  switch (k) {
    case TraceKind::kXnYn:
      return "r_xn_yn";
    case TraceKind::kXnYf:
      return "r_xn_yf";
    case TraceKind::kXvYf:
      return "r_xv_yf";
  }
  return "?";
}

TraceKind parse_trace_kind(std::string_view s) {
  if (s == "r_xn_yn") return TraceKind::kXnYn;
  if (s == "r_xn_yf") return TraceKind::kXnYf;
  if (s == "r_xv_yf") return TraceKind::kXvYf;
  throw ValidationError("unknown trace kind '" + std::string(s) + "'");
}

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::kDefault:
      return "default";
    case Measure::kMarginF:
      return "margin_f";
    case Measure::kDecreaseG:
      return "decrease_g";
  }
  return "?";
}

Measure parse_measure(std::string_view s) {
  if (s == "default") return Measure::kDefault;
  if (s == "margin_f") return Measure::kMarginF;
  if (s == "decrease_g") return Measure::kDecreaseG;
  throw ValidationError("unknown influence measure '" + std::string(s) + "'");
}

TraceSet::TraceSet(std::vector<DynamicsTrace> traces) : traces_(std::move(traces)) {
  for (std::size_t i = 0; i < traces_.size(); ++i) {
    auto& t = traces_[i];
    std::sort(t.points.begin(), t.points.end());
    std::vector<std::int64_t> steps;
    for (std::size_t p = 0; p < t.points.size(); ++p) {
      if (!std::isfinite(t.points[p].second)) {
        throw ValidationError("trace " + t.subject_id + "/" + std::string(to_string(t.kind)) +
                              ": non-finite value at step " + std::to_string(t.points[p].first));
      }
      if (p > 0 && t.points[p].first == t.points[p - 1].first) {
        throw ValidationError("trace " + t.subject_id + "/" + std::string(to_string(t.kind)) +
                              ": repeated step " + std::to_string(t.points[p].first));
      }
      steps.push_back(t.points[p].first);
    }
    if (i == 0) {
      grid_ = steps;
    } else if (steps != grid_) {
      throw ValidationError("trace " + t.subject_id + "/" + std::string(to_string(t.kind)) +
                            ": step grid differs from the other traces");
    }
    if (!index_.emplace(std::pair{t.subject_id, t.kind}, i).second) {
      throw ValidationError("duplicate trace " + t.subject_id + "/" +
                            std::string(to_string(t.kind)));
    }
  }
}

TraceSet TraceSet::from_rows(const std::vector<Json>& rows, std::string_view origin) {
  std::map<std::pair<std::string, TraceKind>, DynamicsTrace> grouped;
  std::size_t line = 0;
  for (const auto& row : rows) {
    ++line;
    try {
      const std::string subject = row.at("subject_id").get<std::string>();
      const TraceKind kind = parse_trace_kind(row.at("kind").get<std::string>());
      const Json& step = row.at("step");
      if (!step.is_number_integer()) throw ValidationError("step must be an integer");
      const Json& value = row.at("value");
      if (!value.is_number()) throw ValidationError("value must be a number");
      auto& t = grouped[{subject, kind}];
      t.subject_id = subject;
      t.kind = kind;
      t.points.emplace_back(step.get<std::int64_t>(), value.get<double>());
    } catch (const Json::exception& e) {
      throw ValidationError(std::string(origin) + " row " + std::to_string(line) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(origin) + " row " + std::to_string(line) + ": " + e.what());
    }
  }
  std::vector<DynamicsTrace> traces;
  for (auto& [key, t] : grouped) traces.push_back(std::move(t));
  return TraceSet(std::move(traces));
}

TraceSet TraceSet::load(const std::filesystem::path& path) {
  return from_rows(read_jsonl(path), path.string());
}

const DynamicsTrace* TraceSet::find(std::string_view subject_id, TraceKind kind) const {
  auto it = index_.find(std::pair{std::string(subject_id), kind});
  return it == index_.end() ? nullptr : &traces_[it->second];
}

void to_json(Json& j, const InfluenceScore& s) {
  j = Json{{"norm_id", s.norm_id},
           {"sec_id", s.sec_id},
           {"score", s.score},
           {"measure", to_string(s.measure)},
           {"no_signal", s.no_signal}};
}

void from_json(const Json& j, InfluenceScore& s) {
  s.norm_id = j.at("norm_id").get<std::string>();
  s.sec_id = j.at("sec_id").get<std::string>();
  s.score = j.at("score").get<double>();
  s.measure = parse_measure(j.value("measure", std::string("default")));
  s.no_signal = j.value("no_signal", false);
}

InfluenceScore influence(const prefs::NormTriple& norm, const TraceSet& traces, Measure measure) {
  auto need = [&](std::string_view subject, TraceKind kind,
                  std::string_view fallback = {}) -> const DynamicsTrace& {
    const DynamicsTrace* t = traces.find(subject, kind);
    if (!t && !fallback.empty()) t = traces.find(fallback, kind);
    if (!t) {
      throw ScoringError("influence: no " + std::string(to_string(kind)) + " trace for " +
                         std::string(subject));
    }
    return *t;
  };

  const DynamicsTrace& xn_yn = need(norm.id, TraceKind::kXnYn);
  const std::size_t steps = xn_yn.points.size();
  std::vector<double> f(steps);
  std::vector<double> g(steps);
  for (std::size_t t = 0; t < steps; ++t) f[t] = xn_yn.points[t].second;
  if (measure != Measure::kDefault) {
    const DynamicsTrace& xn_yf = need(norm.id, TraceKind::kXnYf);
    for (std::size_t t = 0; t < steps; ++t) f[t] -= xn_yf.points[t].second;
  }
  if (measure == Measure::kDecreaseG) {
    for (std::size_t t = 0; t < steps; ++t) g[t] = static_cast<double>(steps - t);
  } else {
    const DynamicsTrace& xv_yf = need(norm.sec_link, TraceKind::kXvYf, norm.id);
    for (std::size_t t = 0; t < steps; ++t) g[t] = -xv_yf.points[t].second;
  }

  InfluenceScore s;
  s.norm_id = norm.id;
  s.sec_id = norm.sec_link;
  s.measure = measure;
  if (steps < 2) throw ScoringError("influence: " + norm.id + " has fewer than 2 checkpoints");
  const TauResult tau = kendall_tau(f, g);
  s.score = tau.tau;
  s.no_signal = tau.no_signal;
  return s;
}

}  // namespace forge::selector
