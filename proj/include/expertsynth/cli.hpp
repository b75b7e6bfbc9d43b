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

#include <ostream>

#include "expertsynth/error.hpp"
#include "expertsynth/run_config.hpp"

namespace expertsynth {

// Exit codes: 0 success, 1 user error (bad flags, bad input, refusal),
// 2 runtime failure (backend, I/O, failure budget exceeded).
inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;
inline constexpr int kExitRuntimeFailure = 2;

int exit_code_for(ErrorCode code);

// Entry point behind the `expertsynth` binary. `factory` overrides how
// backends are reached (tests inject counting mocks); null means the default.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            const TransportFactory* factory = nullptr);

}  // namespace expertsynth
