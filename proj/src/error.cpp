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


#include "expertsynth/error.hpp"

namespace expertsynth {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kCapacity: return "capacity";
    case ErrorCode::kConfiguration: return "configuration";
    case ErrorCode::kConstraint: return "constraint";
    case ErrorCode::kContract: return "contract";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kPermanent: return "permanent";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kConsistency: return "consistency";
    case ErrorCode::kScoring: return "scoring";
    case ErrorCode::kRefusal: return "refusal";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kRunFailed: return "run_failed";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line)
    : std::runtime_error(std::string(error_code_name(code)) + " error: " +
                         (line ? "line " + std::to_string(*line) + ": " : std::string()) +
                         message),
      code_(code),
      line_(line) {}

}  // namespace expertsynth
