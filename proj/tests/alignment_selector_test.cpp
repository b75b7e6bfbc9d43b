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

#include <algorithm>
#include <cmath>

#include "expertsynth/alignment_selector.hpp"
#include "expertsynth/error.hpp"
#include "support.hpp"

using namespace expertsynth;
using testing::make_gateway;

namespace {

ScoredCandidateSet scored(std::vector<double> scores, const std::string& id = "ins") {
  ScoredCandidateSet s;
  s.instruction_id = id;
  s.instruction = "instruction " + id;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    s.scored.push_back({j, "response " + std::to_string(j), scores[j], "rm@mock://r"});
  }
  return s;
}

// Sort-based oracle: stable-sort indices by descending score; the first is
// j+ (lowest index among the maxima); the last after a stable ascending sort
// reversed is j- (highest index among the minima).
std::pair<std::size_t, std::size_t> sort_oracle(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
  auto desc = idx;
  std::stable_sort(desc.begin(), desc.end(), [&](auto a, auto b) { return v[a] > v[b]; });
  auto asc = idx;
  std::stable_sort(asc.begin(), asc.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::size_t minus = asc.front();
  for (auto i : asc) {
    if (v[i] == v[asc.front()]) minus = i;
  }
  return {desc.front(), minus};
}

std::vector<double> random_scores(Rng& rng, std::size_t k) {
  std::vector<double> v(k);
  for (auto& x : v) {
    // Coarse grid so ties occur often.
    x = rng.uniform_below(3) == 0 ? static_cast<double>(rng.uniform_below(4))
                                  : rng.uniform01() * 10.0 - 5.0;
  }
  return v;
}

}  // namespace

TEST_CASE("scores [0.1, 0.9, 0.4] select j* = 1") {
  const auto p = select_sft(scored({0.1, 0.9, 0.4}));
  CHECK(p.chosen_index == 1);
  CHECK(p.response == "response 1");
  CHECK(p.chosen_score == 0.9);
}

TEST_CASE("ties go to the lowest index") {
  CHECK(select_sft(scored({0.5, 0.5})).chosen_index == 0);
  CHECK(select_sft(scored({0.1, 0.7, 0.7})).chosen_index == 1);
}

TEST_CASE("scores [0.2, 0.9, 0.5] give j+ = 1, j- = 0, margin 0.7") {
  const auto out = select_preference(scored({0.2, 0.9, 0.5}));
  const auto* t = std::get_if<PreferenceTriple>(&out);
  REQUIRE(t != nullptr);
  CHECK(t->j_plus == 1);
  CHECK(t->j_minus == 0);
  CHECK(t->margin == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(t->chosen == "response 1");
  CHECK(t->rejected == "response 0");
}

TEST_CASE("all-equal scores are skipped as degenerate") {
  for (std::size_t k = 2; k <= 8; ++k) {
    const auto out = select_preference(scored(std::vector<double>(k, 1.25)));
    const auto* s = std::get_if<PreferenceSkip>(&out);
    REQUIRE(s != nullptr);
    CHECK(s->reason == SkipReason::kDegenerate);
  }
}

TEST_CASE("margin below min_margin is skipped") {
  const auto out = select_preference(scored({0.0, 0.05}), 0.1);
  const auto* s = std::get_if<PreferenceSkip>(&out);
  REQUIRE(s != nullptr);
  CHECK(s->reason == SkipReason::kBelowMargin);
  CHECK(std::holds_alternative<PreferenceTriple>(select_preference(scored({0.0, 0.1}), 0.1)));
}

TEST_CASE("selection preconditions") {
  CHECK_THROWS_AS(select_sft(scored({})), Error);
  CHECK_THROWS_AS(select_preference(scored({1.0})), Error);
  CHECK_THROWS_AS(select_preference(scored({1.0, 2.0}), -0.1), Error);
}

TEST_CASE("random 7-candidate sets match a linear-scan max oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto v = random_scores(rng, 7);
    std::size_t best = 0;
    for (std::size_t j = 1; j < v.size(); ++j) {
      if (v[j] > v[best]) best = j;
    }
    CHECK(select_sft(scored(v)).chosen_index == best);
  }
}

TEST_CASE("random sets match the sort-based preference oracle") {
  Rng rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto v = random_scores(rng, 2 + rng.uniform_below(7));
    const auto [plus, minus] = sort_oracle(v);
    const double margin = v[plus] - v[minus];
    const auto out = select_preference(scored(v));
    if (margin == 0) {
      CHECK(std::holds_alternative<PreferenceSkip>(out));
      continue;
    }
    const auto* t = std::get_if<PreferenceTriple>(&out);
    REQUIRE(t != nullptr);
    CHECK(t->j_plus == plus);
    CHECK(t->j_minus == minus);
    CHECK(std::abs(t->margin - margin) <= 1e-12);
    CHECK(t->margin > 0);
    for (double x : v) {
      CHECK(v[t->j_plus] >= x);
      CHECK(v[t->j_minus] <= x);
    }
    CHECK(select_sft(scored(v)).response == t->chosen);
  }
}

TEST_CASE("strictly increasing transforms leave the selection unchanged") {
  Rng rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const auto v = random_scores(rng, 2 + rng.uniform_below(7));
    auto w = v;
    for (auto& x : w) x = std::atan(x) * 3 + 1;
    CHECK(select_sft(scored(v)).chosen_index == select_sft(scored(w)).chosen_index);
    const auto a = select_preference(scored(v));
    const auto b = select_preference(scored(w));
    REQUIRE(a.index() == b.index());
    if (const auto* ta = std::get_if<PreferenceTriple>(&a)) {
      const auto& tb = std::get<PreferenceTriple>(b);
      CHECK(ta->j_plus == tb.j_plus);
      CHECK(ta->j_minus == tb.j_minus);
    }
  }
}

TEST_CASE("scoring: three candidates give finite, repeatable scores") {
  auto gw = make_gateway(BackendKind::kReward, std::make_shared<MockTransport>());
  CandidateSet set{"ins", {{0, "a", 1, 0}, {1, "b", 2, 0}, {2, "c", 3, 0}}, 3, 0.7};
  const auto s1 = score_candidates(set, "question", *gw);
  const auto s2 = score_candidates(set, "question", *gw, 3);
  REQUIRE(s1.scored.size() == 3);
  CHECK(s1 == s2);
  for (const auto& c : s1.scored) CHECK(std::isfinite(c.score));
  CHECK(s1.scored[1].score == MockTransport::mock_reward("question", "b"));
  CHECK(s1.scored[0].reward_backend_id == "test-model@mock://test");
}

TEST_CASE("scoring: k=1 gives one score") {
  auto gw = make_gateway(BackendKind::kReward, std::make_shared<MockTransport>());
  CandidateSet set{"ins", {{0, "only", 1, 0}}, 1, 0.7};
  CHECK(score_candidates(set, "q", *gw).scored.size() == 1);
}

TEST_CASE("scoring: permuting candidates permutes (text, score) pairs") {
  auto gw = make_gateway(BackendKind::kReward, std::make_shared<MockTransport>());
  CandidateSet set{"ins", {}, 6, 0.7};
  for (std::size_t j = 0; j < 6; ++j) set.candidates.push_back({j, "answer " + std::to_string(j * j), 0, 0});
  auto permuted = set;
  std::reverse(permuted.candidates.begin(), permuted.candidates.end());
  std::swap(permuted.candidates[1], permuted.candidates[4]);
  for (std::size_t j = 0; j < 6; ++j) permuted.candidates[j].index = j;
  auto pairs = [](const ScoredCandidateSet& s) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& c : s.scored) out.emplace_back(c.text, c.score);
    std::sort(out.begin(), out.end());
    return out;
  };
  CHECK(pairs(score_candidates(set, "q", *gw)) == pairs(score_candidates(permuted, "q", *gw)));
}

TEST_CASE("scoring: a failed reward call produces no partial set") {
  auto inner = std::make_shared<MockTransport>();
  auto t = std::make_shared<testing::FaultInjectingTransport>(inner, "poison", 400);
  auto gw = make_gateway(BackendKind::kReward, t);
  CandidateSet set{"ins", {{0, "fine", 0, 0}, {1, "poison", 0, 0}}, 2, 0.7};
  CHECK_THROWS_AS(score_candidates(set, "q", *gw), Error);
}

TEST_CASE("scored set JSON round-trips") {
  const auto s = scored({0.25, -1.5, 3.0});
  CHECK(scored_set_from_json(scored_set_to_json(s)) == s);
}

TEST_CASE("export: empty input writes empty files and zero counts") {
  testing::TempDir dir;
  const auto m = export_datasets({}, {}, dir.path(), ExportSummary{});
  CHECK(read_file(dir / kSftFile).empty());
  CHECK(read_file(dir / kDpoFile).empty());
  for (const char* key : {"personas_in", "instructions_accepted", "sft_pairs", "dpo_triples",
                          "skipped_degenerate", "skipped_margin"}) {
    CHECK(m.at("counts").at(key) == 0);
  }
  CHECK(Json::parse(read_file(dir / kManifestFile)).at("counts") == m.at("counts"));
}

TEST_CASE("export: N non-degenerate sets give N SFT and N DPO lines that round-trip") {
  testing::TempDir dir;
  Rng rng(3);
  std::vector<SftPair> pairs;
  std::vector<PreferenceTriple> triples;
  for (int i = 0; i < 25; ++i) {
    auto s = scored({rng.uniform01(), rng.uniform01() + 1.0, rng.uniform01() - 1.0},
                    "i" + std::to_string(i));
    s.instruction = "Instruction with \"quotes\", unicode \xCE\xBB and\nnewline " + std::to_string(i);
    pairs.push_back(select_sft(s));
    triples.push_back(std::get<PreferenceTriple>(select_preference(s)));
  }
  ExportSummary summary;
  summary.instructions_accepted = 25;
  const auto m = export_datasets(pairs, triples, dir.path(), summary);
  CHECK(m.at("counts").at("sft_pairs") == 25);
  CHECK(m.at("counts").at("dpo_triples") == 25);
  const auto sft = read_sft_file(dir / kSftFile);
  const auto dpo = read_dpo_file(dir / kDpoFile);
  REQUIRE(sft.size() == 25);
  REQUIRE(dpo.size() == 25);
  for (std::size_t i = 0; i < 25; ++i) {
    CHECK(sft[i].instruction == pairs[i].instruction);
    CHECK(sft[i].response == pairs[i].response);
    CHECK(dpo[i].instruction == triples[i].instruction);
    CHECK(dpo[i].chosen == triples[i].chosen);
    CHECK(dpo[i].rejected == triples[i].rejected);
  }
  const auto first = Json::parse(read_jsonl(dir / kSftFile).at(0).dump());
  CHECK(first.size() == 2);
  CHECK(read_jsonl(dir / kDpoFile).at(0).size() == 3);
}

TEST_CASE("export refuses to overwrite without force and rejects zero-margin triples") {
  testing::TempDir dir;
  export_datasets({}, {}, dir.path(), ExportSummary{});
  try {
    export_datasets({}, {}, dir.path(), ExportSummary{});
    FAIL("expected refusal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRefusal);
  }
  export_datasets({}, {}, dir.path(), ExportSummary{}, true);
  PreferenceTriple flat{"i", "q", "a", "b", 0, 1, 0.0};
  CHECK_THROWS_AS(export_datasets({}, {flat}, dir.path(), ExportSummary{}, true), Error);
}
