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

#include <optional>
#include <string>
#include <vector>

namespace expertsynth::testing {

// Reply text and the expected score; nullopt means a parse error.
struct JudgeScoreCase {
  std::string reply;
  std::optional<int> expected;
};

inline const std::vector<JudgeScoreCase>& judge_score_cases() {
  static const std::vector<JudgeScoreCase> cases = {
      // strict path
      {"7", 7},
      {" 10 ", 10},
      {"1", 1},
      {"10", 10},
      {"\n9\n", 9},
      {"07", 7},
      // fallback: first integer token in 1..10
      {"Score: 8", 8},
      {"3 out of 10", 3},
      {"I rate this 3 out of 10", 3},
      {"8/10", 8},
      {"10/10", 10},
      {"Score: 11, revised to 9", 9},
      {"Rating: 7.5 or 8", 8},
      {"Difficulty score: 6.", 6},
      {"**9**", 9},
      {"GPT4 says 5", 5},
      {"score=6", 6},
      {"(5)", 5},
      {"6 (moderately hard)", 6},
      {"-1 then 4", 4},
      // errors
      {"0", std::nullopt},
      {"11", std::nullopt},
      {"eleven", std::nullopt},
      {"", std::nullopt},
      {"   ", std::nullopt},
      {"N/A", std::nullopt},
      {"100", std::nullopt},
      {"7.5", std::nullopt},
      {"-3", std::nullopt},
      {"1e3", std::nullopt},
  };
  return cases;
}

}  // namespace expertsynth::testing
