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

// Acceptance runner: one PASS/FAIL line per criterion, exit 1 on any FAIL.

#include <spdlog/spdlog.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "forge/eval.hpp"
#include "forge/objective.hpp"
#include "forge/oracle/analyzer.hpp"
#include "forge/pipeline.hpp"
#include "forge/selector.hpp"
#include "support/corpora.hpp"
#include "support/e2e.hpp"
#include "support/oracles.hpp"

namespace {

namespace fs = std::filesystem;
using namespace forge;
namespace oracles = forge::testing;

const fs::path kFixtures = FORGE_FIXTURES;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void kendall(Verdict& v) {
  const auto start = Clock::now();
  std::mt19937_64 rng(1);
  double worst = 0;
  int tied_cases = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + rng() % 199;
    const bool ties = i % 2 == 0;
    const int levels = 2 + static_cast<int>(rng() % 10);
    std::vector<double> xs(n);
    std::vector<double> ys(n);
    for (std::size_t k = 0; k < n; ++k) {
      xs[k] = ties ? static_cast<double>(rng() % levels) : std::ldexp(static_cast<double>(rng() >> 11), -53);
      ys[k] = ties ? static_cast<double>(rng() % levels) : std::ldexp(static_cast<double>(rng() >> 11), -53);
    }
    const double expected = oracles::kendall_tau_oracle(xs, ys);
    const auto got = selector::kendall_tau(xs, ys);
    if (std::isnan(expected)) {
      v.check(got.no_signal && got.tau == 0.0, "all-tied case " + std::to_string(i));
      ++tied_cases;
      continue;
    }
    worst = std::max(worst, std::abs(got.tau - expected));
  }
  const double elapsed = seconds_since(start);
  v.check(worst <= 1e-12, "max |error| " + std::to_string(worst));
  v.check(elapsed < 10.0, "runtime");
  v.detail << "1000 pairs, max |error| " << worst << ", " << elapsed << " s";
}

void simpo(Verdict& v) {
  using objective::PairLogProb;
  const double ln2 = objective::simpo_loss(PairLogProb{"r", -3.0, 6, -1.5, 3}, 1.5, 0.0);
  v.check(std::abs(ln2 - std::log(2.0)) <= 1e-12, "ln 2 case");
  // -log sigmoid(0.25) to 20 digits.
  const double worked = objective::simpo_loss(PairLogProb{"r", -0.5, 1, -1.0, 1}, 1.5, 0.5);
  v.check(std::abs(worked - 0.57593941987884356221) <= 1e-9, "worked example");
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> lp(-30, -0.1);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const PairLogProb p{"r", lp(rng), 1 + static_cast<long>(rng() % 20), lp(rng), 1 + static_cast<long>(rng() % 20)};
    const double h = 1e-6;
    PairLogProb up = p;
    up.logp_w += h;
    PairLogProb down = p;
    down.logp_w -= h;
    const double numeric = (objective::simpo_loss(up, 1.5, 0.5) - objective::simpo_loss(down, 1.5, 0.5)) / (2 * h);
    const double analytic = objective::simpo_grad_logp_w(p, 1.5, 0.5);
    worst = std::max(worst, std::abs(numeric - analytic) / std::abs(analytic));
  }
  v.check(worst <= 1e-5, "gradient relative error " + std::to_string(worst));
  v.detail.precision(12);
  v.detail << "ln2 err " << std::abs(ln2 - std::log(2.0)) << ", worked " << worked << ", grad rel err " << worst;
}

void fuzzy(Verdict& v) {
  std::mt19937_64 rng(3);
  const std::vector<char32_t> alphabet{U'a', U'b', U'c', U' ', U'\n', U'é', U'中', U'😀'};
  auto text = [&] {
    std::string s;
    const std::size_t len = rng() % 301;
    for (std::size_t i = 0; i < len; ++i) s += oracles::encode_utf8(alphabet[rng() % alphabet.size()]);
    return s;
  };
  int mismatches = 0;
  for (int i = 0; i < 500; ++i) {
    const std::string a = text();
    const std::string b = text();
    mismatches += selector::fuzzy_ratio(a, b) != oracles::fuzzy_ratio_oracle(a, b);
    mismatches += selector::fuzzy_ratio(a, a) != 100;
  }
  v.check(mismatches == 0, std::to_string(mismatches) + " mismatches");
  v.detail << "500 pairs, " << mismatches << " mismatches";
}

void oracle_fixtures(Verdict& v) {
  const auto start = Clock::now();
  const oracle::BuiltinOracle oracle(oracle::RuleSet::builtin());
  int vuln = 0;
  int fixed = 0;
  int false_negatives = 0;
  int false_positives = 0;
  std::set<std::string> cwes;
  std::set<std::string> languages;
  for (const auto& lang_dir : fs::directory_iterator(kFixtures / "planted")) {
    for (const auto& cwe_dir : fs::directory_iterator(lang_dir.path())) {
      const CwePair pair = make_cwe_pair(lang_dir.path().filename().string(), cwe_dir.path().filename().string());
      for (const auto& file : fs::directory_iterator(cwe_dir.path())) {
        const std::string stem = file.path().stem().string();
        const auto report = oracle.analyze(read_text(file.path()), pair.language);
        if (stem.ends_with("_vuln")) {
          ++vuln;
          const bool hit = std::any_of(report.findings.begin(), report.findings.end(),
                                       [&](const oracle::Finding& f) { return f.pair == pair; });
          false_negatives += !hit;
        } else if (stem.ends_with("_fixed")) {
          ++fixed;
          false_positives += !report.findings.empty();
        }
      }
      cwes.insert(pair.cwe);
      languages.insert(pair.language);
    }
  }
  const double elapsed = seconds_since(start);
  v.check(cwes.size() >= 3 && languages.size() >= 2 && vuln >= 30 && fixed >= 30, "fixture too small");
  v.check(false_negatives == 0, std::to_string(false_negatives) + " false negatives");
  v.check(false_positives == 0, std::to_string(false_positives) + " false positives");
  v.check(elapsed < 5.0, "runtime");
  v.detail << cwes.size() << " CWEs x " << languages.size() << " languages, " << vuln << " vulnerable / " << fixed
           << " fixed, FN " << false_negatives << ", FP " << false_positives << ", " << elapsed << " s";
}

void selection(Verdict& v) {
  std::mt19937_64 rng(5);
  int recovered = 0;
  for (int fixture = 0; fixture < 50; ++fixture) {
    const auto f = oracles::planted_selection(rng, fixture);
    std::set<std::string> got;
    for (const auto& n : selector::select_norm(f.candidates, f.scores, 1, 0.0)) got.insert(n.id);
    recovered += got == f.planted;
  }
  v.check(recovered == 50, std::to_string(recovered) + "/50 recovered");
  int exact = 0;
  for (int round = 0; round < 100; ++round) {
    const auto [cands, scores] = oracles::random_candidates(rng, round % 4 == 0);
    exact += selector::select_norm(cands, scores, 2, 0.2).size() == oracles::closed_form_size(cands, 2, 0.2);
  }
  v.check(exact == 100, std::to_string(exact) + "/100 closed-form sizes");
  v.detail << recovered << "/50 planted sets recovered, " << exact << "/100 closed-form sizes (top_k=2, q=0.2)";
}

void end_to_end(Verdict& v) {
  const fs::path root = fs::temp_directory_path() / ("forge_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const auto names = oracles::code_names(kFixtures / "e2e");
  std::vector<pipeline::RunConfig> runs;
  for (const char* ws : {"a", "b"}) {
    fs::copy(kFixtures / "e2e", root / ws, fs::copy_options::recursive);
    runs.push_back(pipeline::load_config(root / ws / "run.toml"));
    oracles::run_all(runs.back(), names);
  }
  for (const char* file : {"final.prefs.jsonl", "final.manifest.json", "manifest.json", "forge-manifest.json"}) {
    v.check(read_text(runs[0].run_dir() / file) == read_text(runs[1].run_dir() / file),
            std::string(file) + " differs");
  }
  v.check(oracles::final_rows(runs[0], "sec", names) == oracles::expected_sec_rows(), "D_sec* multiset");
  v.check(oracles::final_rows(runs[0], "norm", names) == oracles::expected_norm_rows(), "D_norm* multiset");
  v.detail << "2 runs byte-identical; D_sec* " << oracles::final_rows(runs[0], "sec", names).size()
           << " rows, D_norm* " << oracles::final_rows(runs[0], "norm", names).size() << " rows as enumerated";
  fs::remove_all(root);
}

void heuristic_filter(Verdict& v) {
  const auto corpus = oracles::crafted_corpus();
  selector::FilterReport r;
  const auto kept = selector::heuristic_filter_sec(corpus.triples, corpus.samples, {}, &r);
  v.check(corpus.triples.size() == 40, "corpus size");
  v.check(kept.size() == 22, "kept " + std::to_string(kept.size()));
  v.check(r.syntax == 5 && r.keyword == 5 && r.short_code == 5 && r.dedup == 3, "drop counts");
  v.check(selector::heuristic_filter_sec(kept, corpus.samples, {}) == kept, "idempotence");
  v.detail << "kept " << kept.size() << " of " << corpus.triples.size() << ", drops {" << r.syntax << ","
           << r.keyword << "," << r.short_code << "," << r.dedup << "}";
}

std::string fence(const std::string& code) { return "```\n" + code + "```\n"; }

void eval_harness(Verdict& v) {
  const oracle::BuiltinOracle oracle(oracle::RuleSet::builtin());
  const CwePair py = make_cwe_pair("python", "CWE-78");
  const CwePair js = make_cwe_pair("javascript", "CWE-89");
  auto code = [&](const CwePair& p, const std::string& stem) {
    return read_text(kFixtures / "planted" / p.language / p.cwe / (stem + (p.language == "python" ? ".py" : ".js")));
  };
  auto script = [&](const CwePair& p, int bad, int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(fence(code(p, i % n < bad ? "02_vuln" : "02_fixed")));
    std::rotate(out.begin(), out.begin() + 4, out.end());
    return out;
  };
  auto rule = [](const std::string& contains, const std::vector<std::string>& responses) {
    return Json{{"contains", Json::array({contains})}, {"responses", responses}};
  };
  auto task = [](const std::string& text, const CwePair& p) {
    return make_vuln_instruction(text, p, make_normal_instruction("origin: " + text));
  };
  llm::ScriptedClient mock(Json{{"rules", {rule("first job", script(py, 3, 10)), rule("second job", script(js, 7, 10))}}});
  const llm::GenerationParams params{0.8, 1.0, 512, 10, 1};
  const auto report =
      eval::secure_ratio({task("first job", py), task("second job", js)}, mock, oracle, 10, params, 2);
  v.check(report.per_pair.at(py).ratio == 0.3 && report.per_pair.at(js).ratio == 0.7, "per-pair ratios");
  v.check(report.aggregate_ratio == 0.5, "aggregate");

  // Secure on the third fix request, i.e. the fourth iteration.
  std::vector<std::string> fixes;
  for (int i = 1; i <= 10; ++i) fixes.push_back(fence(code(py, i == 3 ? "03_fixed" : "03_vuln")));
  std::ostringstream iters;
  for (const auto& [budget, want_iters, want_secure] :
       std::vector<std::tuple<int, int, bool>>{{3, 3, false}, {5, 4, true}, {10, 4, true}}) {
    llm::ScriptedClient refine(
        Json{{"rules", {rule("fix potential CWEs", fixes), rule("refine job", {fence(code(py, "03_vuln"))})}}});
    const auto r = eval::iterative_refine(task("refine job", py), "python", refine, oracle, budget, params);
    v.check(r.iters_used == want_iters && r.secure == want_secure, "budget " + std::to_string(budget));
    iters << budget << ":" << r.iters_used << (r.secure ? "/secure " : "/insecure ");
  }
  v.detail << "ratios " << report.per_pair.at(py).ratio << ", " << report.per_pair.at(js).ratio << "; refine "
           << iters.str();
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria{
      {"kendall tau matches pair enumeration", kendall},
      {"SimPO calculator", simpo},
      {"fuzzy ratio matches DP Levenshtein", fuzzy},
      {"static analysis on planted fixtures", oracle_fixtures},
      {"influence selection recovery", selection},
      {"end-to-end determinism", end_to_end},
      {"heuristic filter on crafted corpus", heuristic_filter},
      {"eval harness arithmetic", eval_harness},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      criteria[i].second(v);
    } catch (const std::exception& e) {
      v.check(false, std::string("exception: ") + e.what());
    }
    failures += !v.pass;
    std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.str().c_str());
  }
  return failures == 0 ? 0 : 1;
}
