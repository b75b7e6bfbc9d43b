// Copyright 2026 The ExpertSynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace expertsynth {

enum class ErrorCode {
  kParse,
  kConflict,
  kCapacity,
  kConfiguration,
  kConstraint,
  kContract,
  kTransport,   // retries exhausted
  kPermanent,   // non-retryable backend rejection (HTTP 4xx)
  kProtocol,    // backend answered but the payload is unusable
  kConsistency,
  kScoring,
  kRefusal,
  kIo,
  kRunFailed,
};

std::string_view error_code_name(ErrorCode code);

// Single exception type for the library. `code()` is the machine-readable
// category; parse errors additionally carry the 1-based input line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace expertsynth
