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

#include <string_view>

// Text fixtures compiled in from fixtures/*.txt. The bytes are identical to
// the files on disk.
namespace expertsynth::fixtures {

std::string_view judge_difficulty_prompt();
std::string_view judge_feasibility_prompt();
std::string_view judge_quality_prompt();
std::string_view instruction_template_v1();

}  // namespace expertsynth::fixtures
