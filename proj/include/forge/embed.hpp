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

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace forge {

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Eigen::VectorXd embed(std::string_view text) const = 0;
  virtual int dim() const = 0;
  virtual std::string name() const = 0;
};

// Bag of character trigrams hashed into `dim` buckets, L2-normalised.
// Lowercased, whitespace runs collapsed, padded with one space each side.
class TrigramEmbedder : public Embedder {
 public:
  explicit TrigramEmbedder(int dim = 256);
  Eigen::VectorXd embed(std::string_view text) const override;
  int dim() const override { return dim_; }
  std::string name() const override;

 private:
  int dim_;
};

}  // namespace forge
