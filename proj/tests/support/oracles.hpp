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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Slow, direct reference implementations used as test oracles.
namespace forge::testing {

// Minimal UTF-8 decoder for well-formed input.
inline std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : 4;
    char32_t cp = len == 1 ? c : len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

inline std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

// Full-matrix Wagner-Fischer.
inline std::size_t levenshtein_dp(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

// round(100 * (1 - lev / max_len)), halves rounded up, in exact integers.
inline int fuzzy_ratio_oracle(std::string_view a, std::string_view b) {
  const auto ua = decode_utf8(a);
  const auto ub = decode_utf8(b);
  const std::size_t longest = std::max(ua.size(), ub.size());
  if (longest == 0) return 100;
  const std::size_t num = 100 * (longest - levenshtein_dp(ua, ub));
  std::size_t q = num / longest;
  if (2 * (num % longest) >= longest) ++q;
  return static_cast<int>(q);
}

struct PairCounts {
  long concordant = 0;
  long discordant = 0;
  long tied_x_only = 0;
  long tied_y_only = 0;
  long tied_both = 0;
};

inline PairCounts count_pairs(const std::vector<double>& xs, const std::vector<double>& ys) {
  PairCounts c;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      const double dx = xs[i] - xs[j];
      const double dy = ys[i] - ys[j];
      if (dx == 0 && dy == 0) {
        ++c.tied_both;
      } else if (dx == 0) {
        ++c.tied_x_only;
      } else if (dy == 0) {
        ++c.tied_y_only;
      } else if ((dx > 0) == (dy > 0)) {
        ++c.concordant;
      } else {
        ++c.discordant;
      }
    }
  }
  return c;
}

// Tau-b by pair enumeration; NaN when either side is entirely tied.
inline double kendall_tau_oracle(const std::vector<double>& xs, const std::vector<double>& ys) {
  const PairCounts c = count_pairs(xs, ys);
  const double untied_x = static_cast<double>(c.concordant + c.discordant + c.tied_y_only);
  const double untied_y = static_cast<double>(c.concordant + c.discordant + c.tied_x_only);
  if (untied_x == 0 || untied_y == 0) return std::nan("");
  return static_cast<double>(c.concordant - c.discordant) / std::sqrt(untied_x * untied_y);
}

// -log sigmoid(margin) evaluated directly in long double.
inline double simpo_loss_oracle(double logp_w, double len_w, double logp_l, double len_l, double beta,
                                double gamma) {
  const long double m = static_cast<long double>(beta) * logp_w / len_w -
                        static_cast<long double>(beta) * logp_l / len_l - gamma;
  return static_cast<double>(-std::log(1.0L / (1.0L + std::exp(-m))));
}

}  // namespace forge::testing
