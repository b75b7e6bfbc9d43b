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
#include <cstdint>
#include <string>
#include <vector>

#include "expertsynth/gateway.hpp"
#include "expertsynth/instruction_forge.hpp"
#include "expertsynth/jsonl.hpp"

namespace expertsynth {

struct Candidate {
  std::size_t index = 0;
  std::string text;
  std::int64_t seed = 0;
  std::int64_t latency_ms = 0;

  bool operator==(const Candidate&) const = default;
};

// |candidates| == k, indices 0..k-1 in order.
struct CandidateSet {
  std::string instruction_id;
  std::vector<Candidate> candidates;
  std::size_t k = 0;
  double temperature = 0.0;

  bool operator==(const CandidateSet&) const = default;
};

Json candidate_set_to_json(const CandidateSet& set);
// Validates the cardinality and index invariants (kParse on violation).
CandidateSet candidate_set_from_json(const Json& j);

struct SamplingParams {
  std::size_t k = 5;
  double temperature = 0.7;
  // Lifts the temperature < 1 constraint.
  bool allow_hot_sampling = false;
  std::string system_prompt;
  int max_tokens = 4096;
  // Concurrent requests for the k candidates of one instruction.
  std::size_t max_in_flight = 1;
};

// Exactly k generation calls with seeds derive_seed(run_seed, id, j). All
// texts are kept, duplicates included. Either the full set is returned or an
// exception escapes; there are no partial sets.
// Errors: kContract (record not accepted, k == 0), kConstraint (temperature
// >= 1 without allow_hot_sampling, or < 0), gateway errors otherwise.
CandidateSet sample_candidates(const InstructionRecord& record, const SamplingParams& params,
                               Gateway& generator, std::int64_t run_seed);

}  // namespace expertsynth
