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

#include "forge/embed.hpp"

#include <cctype>
#include <cstdint>

#include "forge/error.hpp"

namespace forge {

namespace {

// FNV-1a, 64-bit.
std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

TrigramEmbedder::TrigramEmbedder(int dim) : dim_(dim) {
  if (dim <= 0) throw ConfigError("embedding dimension must be > 0");
}

std::string TrigramEmbedder::name() const { return "trigram-" + std::to_string(dim_); }

Eigen::VectorXd TrigramEmbedder::embed(std::string_view text) const {
  std::string norm = " ";
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (norm.back() != ' ') norm += ' ';
    } else {
      norm += static_cast<char>(std::tolower(c));
    }
  }
  if (norm.back() != ' ') norm += ' ';

  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
  if (norm.size() < 3) return v;
  for (std::size_t i = 0; i + 3 <= norm.size(); ++i) {
    v[static_cast<Eigen::Index>(fnv1a(std::string_view(norm).substr(i, 3)) %
                                static_cast<std::uint64_t>(dim_))] += 1.0;
  }
  const double n = v.norm();
  if (n > 0) v /= n;
  return v;
}

}  // namespace forge
