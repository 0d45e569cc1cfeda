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

#include <stdexcept>
#include <string>

namespace forge {

// Process exit codes surfaced by the CLI.
enum class ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kValidation = 2,
  kUpstreamStale = 3,
  kClientFailure = 4,
};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, ExitCode code = ExitCode::kFailure)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

// Malformed input: bad identifiers, schema mismatches, out-of-range knobs.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(what, ExitCode::kValidation) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(what, ExitCode::kValidation) {}
};

class StaleInputError : public Error {
 public:
  StaleInputError(const std::string& what, std::string stage)
      : Error(what, ExitCode::kUpstreamStale), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// A text-generation or embedding endpoint failed.
class ClientError : public Error {
 public:
  ClientError(const std::string& what, bool retryable, int attempts = 1)
      : Error(what, ExitCode::kClientFailure),
        retryable_(retryable),
        attempts_(attempts) {}
  bool retryable() const { return retryable_; }
  int attempts() const { return attempts_; }

 private:
  bool retryable_;
  int attempts_;
};

// A pipeline stage could not complete; carries the unit of work it failed on.
class StageError : public Error {
 public:
  StageError(const std::string& what, std::string subject,
             ExitCode code = ExitCode::kClientFailure)
      : Error(what, code), subject_(std::move(subject)) {}
  const std::string& subject() const { return subject_; }

 private:
  std::string subject_;
};

}  // namespace forge
