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
#include <cstdint>
#include <unordered_map>

#include "forge/selector.hpp"

namespace forge::selector {

std::vector<char32_t> code_points(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = 0;
    if (c < 0x80) {
      cp = c;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      extra = -1;
    }
    bool ok = extra >= 0 && i + static_cast<std::size_t>(extra) < s.size();
    for (int k = 1; ok && k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((cc & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok) {
      // Lone byte; mapped past the Unicode range so it never equals a code point.
      out.push_back(0x110000u + c);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

std::size_t levenshtein(std::span<const char32_t> a, std::span<const char32_t> b) {
  if (a.size() < b.size()) std::swap(a, b);
  // `b` is the pattern (rows), `a` the text (columns).
  const std::size_t m = b.size();
  const std::size_t n = a.size();
  if (m == 0) return n;

  constexpr std::size_t kW = 64;
  const std::size_t blocks = (m + kW - 1) / kW;
  std::unordered_map<char32_t, std::vector<std::uint64_t>> peq;
  for (std::size_t i = 0; i < m; ++i) {
    auto& v = peq[b[i]];
    if (v.empty()) v.assign(blocks, 0);
    v[i / kW] |= std::uint64_t{1} << (i % kW);
  }
  const std::vector<std::uint64_t> none(blocks, 0);

  std::vector<std::uint64_t> pv(blocks, ~std::uint64_t{0});
  std::vector<std::uint64_t> mv(blocks, 0);
  std::vector<std::size_t> score(blocks);
  for (std::size_t k = 0; k < blocks; ++k) score[k] = std::min(m, (k + 1) * kW);
  const std::uint64_t last_high = std::uint64_t{1} << ((m - 1) % kW);
  constexpr std::uint64_t kHigh = std::uint64_t{1} << (kW - 1);

  for (std::size_t j = 0; j < n; ++j) {
    auto it = peq.find(a[j]);
    const std::vector<std::uint64_t>& eqs = it == peq.end() ? none : it->second;
    int hin = 1;
    for (std::size_t k = 0; k < blocks; ++k) {
      std::uint64_t eq = eqs[k];
      const std::uint64_t p = pv[k];
      const std::uint64_t mm = mv[k];
      const std::uint64_t xv = eq | mm;
      if (hin < 0) eq |= 1;
      const std::uint64_t xh = (((eq & p) + p) ^ p) | eq;
      std::uint64_t ph = mm | ~(xh | p);
      std::uint64_t mh = p & xh;
      const std::uint64_t high = k + 1 == blocks ? last_high : kHigh;
      int hout = 0;
      if (ph & high) {
        hout = 1;
      } else if (mh & high) {
        hout = -1;
      }
      ph <<= 1;
      mh <<= 1;
      if (hin < 0) {
        mh |= 1;
      } else if (hin > 0) {
        ph |= 1;
      }
      pv[k] = mh | ~(xv | ph);
      mv[k] = ph & xv;
      score[k] = static_cast<std::size_t>(static_cast<long long>(score[k]) + hout);
      hin = hout;
    }
  }
  return score[blocks - 1];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  const auto ca = code_points(a);
  const auto cb = code_points(b);
  return levenshtein(std::span<const char32_t>(ca), std::span<const char32_t>(cb));
}

namespace {

int ratio_from(std::size_t dist, std::size_t longest) {
  if (longest == 0) return 100;
  const std::size_t same = longest - dist;
  return static_cast<int>((200 * same + longest) / (2 * longest));
}

}  // namespace

int fuzzy_ratio(std::string_view a, std::string_view b) {
  const auto ca = code_points(a);
  const auto cb = code_points(b);
  const std::size_t d =
      levenshtein(std::span<const char32_t>(ca), std::span<const char32_t>(cb));
  return ratio_from(d, std::max(ca.size(), cb.size()));
}

}  // namespace forge::selector
