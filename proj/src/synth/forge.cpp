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
#include <limits>
#include <random>

#include "forge/assets.hpp"
#include "forge/synth.hpp"

namespace forge::synth {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::uint64_t hash_prefix(std::string_view hex) {
  return std::stoull(std::string(hex.substr(0, 15)), nullptr, 16);
}

// Index one past the '}' closing the object opened at `open`, or npos.
std::size_t match_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::string_view prompt_template(std::string_view name) {
  auto found = assets::find("prompts/" + std::string(name) + ".txt");
  if (!found) throw ConfigError("no prompt template '" + std::string(name) + "'");
  return *found;
}

std::string fill_template(std::string_view tmpl,
                          const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const std::size_t open = tmpl.find("[[", i);
    if (open == std::string_view::npos) break;
    const std::size_t close = tmpl.find("]]", open + 2);
    if (close == std::string_view::npos) break;
    out.append(tmpl.substr(i, open - i));
    const std::string key(tmpl.substr(open + 2, close - open - 2));
    auto it = values.find(key);
    if (it == values.end()) {
      out.append(tmpl.substr(open, close + 2 - open));
    } else {
      out += it->second;
    }
    i = close + 2;
  }
  out.append(tmpl.substr(std::min(i, tmpl.size())));
  return out;
}

std::string language_display(std::string_view language) {
  static const std::map<std::string, std::string, std::less<>> kNames = {
      {"c", "C"}, {"cpp", "C++"}, {"java", "Java"}, {"javascript", "JavaScript"},
      {"python", "Python"}};
  auto it = kNames.find(language);
  return it == kNames.end() ? std::string(language) : it->second;
}

std::string scenario_prompt(const CwePair& pair) {
  return fill_template(prompt_template("scenarios"),
                       {{"CWE-ID", pair.cwe}, {"LANG", language_display(pair.language)}});
}

std::string compose_prompt(const Instruction& x_n, const ScenarioRecord& scenario,
                           const CwePair& pair) {
  const std::string lang = language_display(pair.language);
  return fill_template(prompt_template("compose"),
                       {{"CWE-ID", pair.cwe},
                        {"LANG", lang},
                        {"lang", lang},
                        {"Explanations and relevant scenarios of CWE-ID", scenario.scenario_text},
                        {"Original task", x_n.text}});
}

std::vector<ScenarioRecord> query_cwe_scenarios(const CwePair& pair,
                                                const llm::GenerationParams& params,
                                                llm::TextClient& client) {
  llm::validate(params);
  const std::string prompt = scenario_prompt(pair);
  const std::string prompt_hash = sha256_hex(prompt);
  std::vector<ScenarioRecord> out;
  for (int i = 0; i < params.n_samples; ++i) {
    std::string text;
    try {
      text = trim(client.complete(prompt, params, i).text);
    } catch (const ClientError& e) {
      throw StageError(std::string("scenario query failed: ") + e.what(), pair.key());
    }
    if (text.empty()) continue;
    out.push_back(ScenarioRecord{pair, std::move(text), prompt_hash, i});
  }
  return out;
}

std::vector<Instruction> relevant_instructions(const std::vector<Instruction>& seeds,
                                               const CwePair& pair,
                                               const RelevanceOptions& options) {
  std::vector<std::string> keywords;
  for (const auto& k : options.keywords) {
    std::string lower = k;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    keywords.push_back(lower);
  }
  std::vector<std::pair<std::string, const Instruction*>> keyed;
  for (const auto& s : seeds) {
    if (s.kind != InstructionKind::kNormal) continue;
    if (s.language && normalize_language(*s.language) != pair.language) continue;
    if (!keywords.empty()) {
      std::string lower = s.text;
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      const bool hit = std::any_of(keywords.begin(), keywords.end(), [&](const std::string& k) {
        return lower.find(k) != std::string::npos;
      });
      if (!hit) continue;
    }
    keyed.emplace_back(sha256_hex(pair.key() + "\n" + s.id), &s);
  }
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  keyed.erase(std::unique(keyed.begin(), keyed.end(),
                          [](const auto& a, const auto& b) { return a.first == b.first; }),
              keyed.end());
  if (options.cap > 0 && keyed.size() > options.cap) keyed.resize(options.cap);
  std::vector<Instruction> out;
  out.reserve(keyed.size());
  for (const auto& [h, s] : keyed) out.push_back(*s);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  if (out.empty()) spdlog::info("relevance: no seeds for {}", pair.key());
  return out;
}

std::optional<std::string> extract_task(std::string_view completion) {
  std::optional<std::string> last;
  std::size_t i = 0;
  while (i < completion.size()) {
    if (completion[i] != '{') {
      ++i;
      continue;
    }
    const std::size_t end = match_brace(completion, i);
    if (end == std::string_view::npos) {
      ++i;
      continue;
    }
    Json j = Json::parse(completion.substr(i, end - i), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      ++i;
      continue;
    }
    if (j.contains("task") && j["task"].is_string()) {
      std::string task = trim(j["task"].get<std::string>());
      if (!task.empty()) last = std::move(task);
    }
    i = end;
  }
  return last;
}

Instruction compose(const Instruction& x_n, const ScenarioRecord& scenario, const CwePair& pair,
                    const llm::GenerationParams& params, llm::TextClient& client,
                    int sample_index) {
  if (x_n.kind != InstructionKind::kNormal) {
    throw ValidationError("compose: " + x_n.id + " is not a normal instruction");
  }
  const std::string completion =
      client.complete(compose_prompt(x_n, scenario, pair), params, sample_index).text;
  auto task = extract_task(completion);
  if (!task) throw ComposeParseError("compose: no {\"task\": ...} object for " + x_n.id);
  return make_vuln_instruction(std::move(*task), pair, x_n);
}

std::vector<std::size_t> kmeans_representatives(const Eigen::MatrixXd& points, int k,
                                                std::uint64_t seed,
                                                const ClusterOptions& options) {
  const auto n = static_cast<std::size_t>(points.cols());
  if (k < 1) throw ValidationError("cluster count must be >= 1");
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  if (n <= static_cast<std::size_t>(k)) {
    if (n < static_cast<std::size_t>(k)) {
      spdlog::warn("cluster: {} points for {} clusters, keeping all", n, k);
    }
    return all;
  }
  const Eigen::Index kk = k;
  const Eigen::Index dims = points.rows();
  const Eigen::VectorXd sq = points.colwise().squaredNorm().transpose();

  // k-means++ seeding.
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd centers(dims, kk);
  std::vector<char> chosen(n, 0);
  std::size_t first = rng() % n;
  centers.col(0) = points.col(static_cast<Eigen::Index>(first));
  chosen[first] = 1;
  Eigen::VectorXd d2 = (points.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
  for (Eigen::Index c = 1; c < kk; ++c) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!chosen[i]) total += d2[static_cast<Eigen::Index>(i)];
    }
    std::size_t pick = n;
    if (total > 0) {
      const double r = unit_uniform(rng) * total;
      double acc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        acc += d2[static_cast<Eigen::Index>(i)];
        pick = i;
        if (acc > r) break;
      }
    } else {
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) rest.push_back(i);
      }
      pick = rest[rng() % rest.size()];
    }
    chosen[pick] = 1;
    centers.col(c) = points.col(static_cast<Eigen::Index>(pick));
    d2 = d2.cwiseMin(
        (points.colwise() - centers.col(c)).colwise().squaredNorm().transpose());
  }

  std::vector<Eigen::Index> label(n, 0);
  Eigen::VectorXd best(static_cast<Eigen::Index>(n));
  auto assign = [&] {
    const Eigen::VectorXd csq = centers.colwise().squaredNorm().transpose();
    constexpr Eigen::Index kBlock = 1024;
    for (Eigen::Index b = 0; b < static_cast<Eigen::Index>(n); b += kBlock) {
      const Eigen::Index w = std::min<Eigen::Index>(kBlock, static_cast<Eigen::Index>(n) - b);
      const Eigen::MatrixXd cross = centers.transpose() * points.middleCols(b, w);
      for (Eigen::Index j = 0; j < w; ++j) {
        Eigen::Index arg = 0;
        double lo = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < kk; ++c) {
          const double d = csq[c] - 2 * cross(c, j);
          if (d < lo) {
            lo = d;
            arg = c;
          }
        }
        label[static_cast<std::size_t>(b + j)] = arg;
        best[b + j] = std::max(0.0, lo + sq[b + j]);
      }
    }
  };

  Eigen::MatrixXd means(dims, kk);
  for (int iter = 0; iter < options.max_iters; ++iter) {
    assign();
    std::vector<std::size_t> count(static_cast<std::size_t>(kk), 0);
    for (auto l : label) ++count[static_cast<std::size_t>(l)];
    // Refill empty clusters with the point farthest from its centre.
    for (Eigen::Index c = 0; c < kk; ++c) {
      if (count[static_cast<std::size_t>(c)] > 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (count[static_cast<std::size_t>(label[i])] < 2) continue;
        if (far == n || best[static_cast<Eigen::Index>(i)] > best[static_cast<Eigen::Index>(far)]) {
          far = i;
        }
      }
      --count[static_cast<std::size_t>(label[far])];
      label[far] = c;
      best[static_cast<Eigen::Index>(far)] = 0;
      count[static_cast<std::size_t>(c)] = 1;
    }
    means.setZero();
    for (std::size_t i = 0; i < n; ++i) means.col(label[i]) += points.col(static_cast<Eigen::Index>(i));
    for (Eigen::Index c = 0; c < kk; ++c) {
      means.col(c) /= static_cast<double>(count[static_cast<std::size_t>(c)]);
    }
    const double shift = (means - centers).colwise().norm().maxCoeff();
    centers = means;
    if (shift <= options.tolerance) break;
  }

  // `means` holds the member means of the final labelling.
  std::vector<std::size_t> rep(static_cast<std::size_t>(kk), n);
  std::vector<double> rep_d(static_cast<std::size_t>(kk), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(label[i]);
    const double d = (points.col(static_cast<Eigen::Index>(i)) - means.col(label[i])).squaredNorm();
    if (rep[c] == n || d < rep_d[c]) {
      rep[c] = i;
      rep_d[c] = d;
    }
  }
  std::sort(rep.begin(), rep.end());
  return rep;
}

std::vector<Instruction> cluster_select(const std::vector<Instruction>& instructions, int k,
                                        const Embedder& embedder, std::uint64_t seed,
                                        const ClusterOptions& options) {
  std::vector<Instruction> sorted = instructions;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  if (sorted.size() <= static_cast<std::size_t>(std::max(k, 0))) {
    if (sorted.size() < static_cast<std::size_t>(k)) {
      spdlog::warn("cluster: {} instructions for K={}, keeping all", sorted.size(), k);
    }
    return sorted;
  }
  Eigen::MatrixXd points(embedder.dim(), static_cast<Eigen::Index>(sorted.size()));
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    points.col(static_cast<Eigen::Index>(i)) = embedder.embed(sorted[i].text);
  }
  std::vector<Instruction> out;
  for (std::size_t i : kmeans_representatives(points, k, seed, options)) out.push_back(sorted[i]);
  return out;
}

double mean_pairwise_cosine(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.cols();
  if (n < 2) throw ValidationError("diversity needs at least 2 instructions");
  Eigen::MatrixXd unit = points;
  double self = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = unit.col(i).norm();
    if (norm > 0) {
      unit.col(i) /= norm;
      self += 1;
    }
  }
  const Eigen::VectorXd sum = unit.rowwise().sum();
  return (sum.squaredNorm() - self) / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double diversity_score(const std::vector<Instruction>& instructions, const Embedder& embedder) {
  if (instructions.size() < 2) throw ValidationError("diversity needs at least 2 instructions");
  Eigen::MatrixXd points(embedder.dim(), static_cast<Eigen::Index>(instructions.size()));
  for (std::size_t i = 0; i < instructions.size(); ++i) {
    points.col(static_cast<Eigen::Index>(i)) = embedder.embed(instructions[i].text);
  }
  return mean_pairwise_cosine(points);
}

SynthResult synthesize_pair(const CwePair& pair, const std::vector<Instruction>& seeds,
                            const SynthOptions& options, llm::TextClient& client,
                            const Embedder& embedder) {
  SynthResult result;
  result.scenarios = query_cwe_scenarios(pair, options.scenario_params, client);
  result.counts.scenarios = result.scenarios.size();
  const auto relevant = relevant_instructions(seeds, pair, options.relevance);
  result.counts.relevant = relevant.size();
  if (result.scenarios.empty() || relevant.empty()) {
    spdlog::warn("synth {}: {} scenarios, {} relevant seeds", pair.key(),
                 result.scenarios.size(), relevant.size());
    return result;
  }

  const auto composed = llm::parallel_map<std::optional<Instruction>>(
      relevant.size(), options.max_inflight,
      [&](std::size_t i) -> std::optional<Instruction> {
        const Instruction& x_n = relevant[i];
        const auto& scenario =
            result.scenarios[hash_prefix(x_n.id) % result.scenarios.size()];
        try {
          return compose(x_n, scenario, pair, options.compose_params, client);
        } catch (const ComposeParseError&) {
          return std::nullopt;
        } catch (const ClientError& e) {
          throw StageError(std::string("compose failed: ") + e.what(), x_n.id);
        }
      });

  std::vector<Instruction> pool;
  for (const auto& c : composed) {
    if (c) {
      pool.push_back(*c);
    } else {
      ++result.counts.parse_failures;
    }
  }
  std::sort(pool.begin(), pool.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  pool.erase(std::unique(pool.begin(), pool.end(),
                         [](const auto& a, const auto& b) { return a.id == b.id; }),
             pool.end());
  result.counts.synthesized = pool.size();
  result.instructions = cluster_select(pool, options.k, embedder, options.seed);
  result.counts.clustered = result.instructions.size();
  return result;
}

}  // namespace forge::synth
