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


#include <doctest.h>

#include <set>

#include "expertsynth/candidate_sampler.hpp"
#include "expertsynth/error.hpp"
#include "support.hpp"

using namespace expertsynth;
using testing::make_gateway;

namespace {

InstructionRecord accepted(const std::string& id) {
  InstructionRecord r;
  r.instruction_id = id;
  r.persona_id = "p";
  r.text = "Explain the thermodynamics of protein folding in crowded cellular environments.";
  r.gate = GateDecision::from_reasons({}, GateMode::kHeuristic);
  return r;
}

}  // namespace

TEST_CASE("k=1 at temperature 0 yields one candidate, byte-identical on rerun") {
  auto gw = make_gateway(BackendKind::kGeneration, std::make_shared<MockTransport>());
  SamplingParams p;
  p.k = 1;
  p.temperature = 0.0;
  const auto a = sample_candidates(accepted("i1"), p, *gw, 5);
  const auto b = sample_candidates(accepted("i1"), p, *gw, 5);
  REQUIRE(a.candidates.size() == 1);
  CHECK(a == b);
  CHECK(candidate_set_to_json(a).dump() == candidate_set_to_json(b).dump());
}

TEST_CASE("k=4 gives indices 0..3 with distinct seeds") {
  auto gw = make_gateway(BackendKind::kGeneration, std::make_shared<MockTransport>());
  SamplingParams p;
  p.k = 4;
  const auto s = sample_candidates(accepted("i2"), p, *gw, 5);
  REQUIRE(s.candidates.size() == 4);
  std::set<std::int64_t> seeds;
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(s.candidates[j].index == j);
    CHECK(s.candidates[j].seed == derive_seed(5, "i2", j));
    seeds.insert(s.candidates[j].seed);
  }
  CHECK(seeds.size() == 4);
  CHECK(s.k == 4);
  CHECK(s.temperature == 0.7);
}

TEST_CASE("temperature rules") {
  auto t = std::make_shared<MockTransport>();
  auto gw = make_gateway(BackendKind::kGeneration, t);
  SamplingParams p;
  p.temperature = 1.2;
  try {
    sample_candidates(accepted("i"), p, *gw, 1);
    FAIL("expected constraint error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConstraint);
  }
  p.temperature = 1.0;
  CHECK_THROWS_AS(sample_candidates(accepted("i"), p, *gw, 1), Error);
  p.temperature = -0.1;
  CHECK_THROWS_AS(sample_candidates(accepted("i"), p, *gw, 1), Error);
  CHECK(t->total_calls() == 0);
  p.temperature = 1.2;
  p.allow_hot_sampling = true;
  CHECK(sample_candidates(accepted("i"), p, *gw, 1).candidates.size() == 5);
}

TEST_CASE("rejected instructions and k=0 are contract violations") {
  auto gw = make_gateway(BackendKind::kGeneration, std::make_shared<MockTransport>());
  auto r = accepted("i");
  r.gate = GateDecision::from_reasons({GateReason::kUnsafe}, GateMode::kJudge);
  CHECK_THROWS_AS(sample_candidates(r, {}, *gw, 1), Error);
  SamplingParams p;
  p.k = 0;
  CHECK_THROWS_AS(sample_candidates(accepted("i"), p, *gw, 1), Error);
}

TEST_CASE("a failing candidate yields no partial set") {
  auto inner = std::make_shared<MockTransport>();
  // Fail the request carrying the seed of candidate 2.
  const auto bad_seed = std::to_string(derive_seed(9, "i", 2));
  auto t = std::make_shared<testing::FaultInjectingTransport>(inner, "\"seed\":" + bad_seed, 400);
  auto gw = make_gateway(BackendKind::kGeneration, t);
  SamplingParams p;
  p.k = 4;
  p.max_in_flight = 2;
  CHECK_THROWS_AS(sample_candidates(accepted("i"), p, *gw, 9), Error);
}

TEST_CASE("parallel and sequential sampling agree") {
  auto gw = make_gateway(BackendKind::kGeneration, std::make_shared<MockTransport>());
  SamplingParams p;
  p.k = 6;
  const auto seq = sample_candidates(accepted("i"), p, *gw, 2);
  p.max_in_flight = 4;
  CHECK(sample_candidates(accepted("i"), p, *gw, 2) == seq);
}

TEST_CASE("candidate set JSON round-trips and validates cardinality") {
  auto gw = make_gateway(BackendKind::kGeneration, std::make_shared<MockTransport>());
  SamplingParams p;
  p.k = 3;
  const auto s = sample_candidates(accepted("i"), p, *gw, 2);
  const auto j = candidate_set_to_json(s);
  CHECK(candidate_set_from_json(j) == s);
  auto short_set = j;
  short_set["candidates"].erase(short_set["candidates"].begin());
  CHECK_THROWS_AS(candidate_set_from_json(short_set), Error);
  auto bad_index = j;
  bad_index["candidates"][1]["index"] = 7;
  CHECK_THROWS_AS(candidate_set_from_json(bad_index), Error);
}

TEST_CASE("seed derivation is pure and index-sensitive") {
  CHECK(derive_seed(1, "a", 0) == derive_seed(1, "a", 0));
  CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
  CHECK(derive_seed(1, "a", 0) != derive_seed(2, "a", 0));
  CHECK(derive_seed(1, "a", 0) >= 0);
}
