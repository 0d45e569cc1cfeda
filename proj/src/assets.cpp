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

#include "forge/assets.hpp"

namespace forge::assets {

std::optional<std::string_view> find(std::string_view name) {
  for (const Asset& a : all()) {
    if (a.name == name) return a.content;
  }
  return std::nullopt;
}

}  // namespace forge::assets
