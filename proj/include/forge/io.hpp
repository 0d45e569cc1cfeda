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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace forge {

using Json = nlohmann::json;

// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

// Compact serialization with sorted keys. Every content hash in the pipeline
// is taken over this form.
std::string canonical(const Json& value);
std::string content_hash(const Json& value);

std::string read_text(const std::filesystem::path& path);

// Parses one JSON value per non-blank line. Errors name the file and line.
std::vector<Json> read_jsonl(const std::filesystem::path& path);

// Temp file in the destination directory, then rename. A reader never sees a
// partially written file.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);
void write_jsonl_atomic(const std::filesystem::path& path,
                        const std::vector<Json>& rows);
void write_json_atomic(const std::filesystem::path& path, const Json& value);

// Sidecar manifest declaring the dataset schema version for `dataset`.
void write_schema_sidecar(const std::filesystem::path& dataset,
                          std::size_t rows);

inline constexpr int kSchemaVersion = 1;

}  // namespace forge
