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


#include "expertsynth/candidate_sampler.hpp"

#include <cmath>
#include <optional>

#include "expertsynth/error.hpp"
#include "expertsynth/hashing.hpp"
#include "expertsynth/parallel.hpp"

namespace expertsynth {

Json candidate_set_to_json(const CandidateSet& set) {
  Json candidates = Json::array();
  for (const auto& c : set.candidates) {
    candidates.push_back(Json{{"index", c.index},
                              {"text", c.text},
                              {"seed", c.seed},
                              {"latency_ms", c.latency_ms}});
  }
  Json j;
  j["instruction_id"] = set.instruction_id;
  j["k"] = set.k;
  j["temperature"] = set.temperature;
  j["candidates"] = std::move(candidates);
  return j;
}

CandidateSet candidate_set_from_json(const Json& j) {
  CandidateSet set;
  try {
    set.instruction_id = j.at("instruction_id").get<std::string>();
    set.k = j.at("k").get<std::size_t>();
    set.temperature = j.at("temperature").get<double>();
    for (const auto& c : j.at("candidates")) {
      set.candidates.push_back(Candidate{c.at("index").get<std::size_t>(),
                                         c.at("text").get<std::string>(),
                                         c.at("seed").get<std::int64_t>(),
                                         c.value("latency_ms", std::int64_t{0})});
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed candidate set: ") + e.what());
  }
  if (set.candidates.size() != set.k) {
    throw Error(ErrorCode::kParse, "candidate set " + set.instruction_id + " has " +
                                       std::to_string(set.candidates.size()) + " of k=" +
                                       std::to_string(set.k) + " candidates");
  }
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    if (set.candidates[i].index != i) {
      throw Error(ErrorCode::kParse, "candidate indices of " + set.instruction_id +
                                         " are not 0..k-1");
    }
  }
  return set;
}

CandidateSet sample_candidates(const InstructionRecord& record, const SamplingParams& params,
                               Gateway& generator, std::int64_t run_seed) {
  if (!record.gate.accepted) {
    throw Error(ErrorCode::kContract, "instruction " + record.instruction_id +
                                          " did not pass the quality gate");
  }
  if (params.k == 0) throw Error(ErrorCode::kContract, "k must be >= 1");
  if (!std::isfinite(params.temperature) || params.temperature < 0) {
    throw Error(ErrorCode::kConstraint, "temperature must be finite and >= 0");
  }
  if (params.temperature >= 1.0 && !params.allow_hot_sampling) {
    throw Error(ErrorCode::kConstraint,
                "candidate sampling requires temperature < 1 (got " +
                    std::to_string(params.temperature) + "); set allow_hot_sampling to override");
  }

  CandidateSet set;
  set.instruction_id = record.instruction_id;
  set.k = params.k;
  set.temperature = params.temperature;
  std::vector<std::optional<Candidate>> slots(params.k);
  parallel_for(params.k, params.max_in_flight, [&](std::size_t j) {
    GenerationRequest request;
    request.system_prompt = params.system_prompt;
    request.user_prompt = record.text;
    request.temperature = params.temperature;
    request.max_tokens = params.max_tokens;
    request.seed = derive_seed(run_seed, record.instruction_id, j);
    const auto result = generator.generate_text(request);
    slots[j] = Candidate{j, result.text, *request.seed, result.latency_ms};
  });
  set.candidates.reserve(params.k);
  for (auto& slot : slots) set.candidates.push_back(std::move(*slot));
  return set;
}

}  // namespace expertsynth
