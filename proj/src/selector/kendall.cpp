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
#include <cstdint>
#include <numeric>

#include "forge/selector.hpp"

namespace forge::selector {

namespace {

// Sum of t(t-1)/2 over runs of equal values in a sorted sequence.
template <typename Eq>
std::int64_t tied_pairs(std::size_t n, Eq equal) {
  std::int64_t total = 0;
  std::int64_t run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (equal(i - 1, i)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total + run * (run - 1) / 2;
}

// Stable merge sort of `v` counting inversions (strictly greater before smaller).
std::int64_t sort_count_swaps(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                              std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = sort_count_swaps(v, buf, lo, mid) + sort_count_swaps(v, buf, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      buf[k++] = v[j++];
      swaps += static_cast<std::int64_t>(mid - i);
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

TauResult kendall_tau(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw ValidationError("kendall_tau: length mismatch (" + std::to_string(xs.size()) + " vs " +
                          std::to_string(ys.size()) + ")");
  }
  const std::size_t n = xs.size();
  if (n < 2) throw ValidationError("kendall_tau: needs at least 2 points");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(xs[i]) || std::isnan(ys[i])) throw ValidationError("kendall_tau: NaN input");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (xs[a] != xs[b]) return xs[a] < xs[b];
    return ys[a] < ys[b];
  });

  const auto n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t ties_x =
      tied_pairs(n, [&](std::size_t i, std::size_t j) { return xs[order[i]] == xs[order[j]]; });
  const std::int64_t ties_xy = tied_pairs(n, [&](std::size_t i, std::size_t j) {
    return xs[order[i]] == xs[order[j]] && ys[order[i]] == ys[order[j]];
  });

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = ys[order[i]];
  std::vector<double> buf(n);
  const std::int64_t swaps = sort_count_swaps(y, buf, 0, n);
  const std::int64_t ties_y = tied_pairs(n, [&](std::size_t i, std::size_t j) { return y[i] == y[j]; });

  const std::int64_t left = n0 - ties_x;
  const std::int64_t right = n0 - ties_y;
  if (left == 0 || right == 0) return {0.0, true};
  // concordant - discordant
  const std::int64_t diff = n0 - ties_x - ties_y + ties_xy - 2 * swaps;
  const double tau = static_cast<double>(diff) /
                     std::sqrt(static_cast<double>(left) * static_cast<double>(right));
  return {std::clamp(tau, -1.0, 1.0), false};
}

}  // namespace forge::selector
