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

#include <optional>
#include <span>
#include <string_view>

namespace forge::assets {

struct Asset {
  std::string_view name;
  std::string_view content;
};

// Rule packs and prompt templates compiled into the binary, sorted by name.
std::span<const Asset> all();

std::optional<std::string_view> find(std::string_view name);

}  // namespace forge::assets
