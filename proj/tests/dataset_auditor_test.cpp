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
#include <numeric>

#include "expertsynth/dataset_auditor.hpp"
#include "expertsynth/error.hpp"
#include "expertsynth/fixtures.hpp"
#include "judge_score_cases.hpp"
#include "support.hpp"

using namespace expertsynth;
using testing::make_gateway;

namespace {

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("r" + std::to_string(i));
  return out;
}

// O(n^2) double loop, written independently of the library.
std::vector<double> mnd_oracle(const std::vector<std::vector<double>>& vs) {
  std::vector<double> out(vs.size(), INFINITY);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = 0; j < vs.size(); ++j) {
      if (i == j) continue;
      double sq = 0;
      for (std::size_t d = 0; d < vs[i].size(); ++d) {
        const double diff = vs[i][d] - vs[j][d];
        sq += diff * diff;
      }
      out[i] = std::min(out[i], std::sqrt(sq));
    }
  }
  return out;
}

// Sorting-based quantile with linear interpolation between closest ranks.
double quantile_oracle(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

JudgeVerdict verdict(JudgeMetric m, int score, const std::string& rid = "r") {
  JudgeVerdict v;
  v.dataset_id = "d";
  v.record_id = rid;
  v.metric = m;
  v.score = score;
  return v;
}

}  // namespace

TEST_CASE("MND: identical embeddings give zero") {
  std::vector<EmbeddingVector> vs = {{{0.3, 0.4}}, {{0.3, 0.4}}};
  const auto r = min_neighbor_distances(vs, ids(2));
  CHECK(r.per_record[0].mnd == 0.0);
  CHECK(r.per_record[1].mnd == 0.0);
}

TEST_CASE("MND: (0,0), (3,4), (6,8) give 5, 5, 5") {
  std::vector<EmbeddingVector> vs = {{{0, 0}}, {{3, 4}}, {{6, 8}}};
  const auto r = min_neighbor_distances(vs, ids(3), "three");
  REQUIRE(r.per_record.size() == 3);
  for (const auto& e : r.per_record) CHECK(e.mnd == 5.0);
  CHECK(r.mean == 5.0);
  CHECK(r.max == 5.0);
  CHECK_FALSE(r.approximate);
  CHECK(r.histogram.counts.size() == 50);
  CHECK(r.histogram.counts.back() == 3);
}

TEST_CASE("MND: 200 random mock vectors match the O(n^2) oracle") {
  std::vector<EmbeddingVector> vs;
  std::vector<std::vector<double>> raw;
  for (int i = 0; i < 200; ++i) {
    raw.push_back(MockTransport::mock_embedding("m", "text " + std::to_string(i), 16));
    vs.push_back({raw.back()});
  }
  const auto r = min_neighbor_distances(vs, ids(200));
  const auto expect = mnd_oracle(raw);
  for (std::size_t i = 0; i < 200; ++i) CHECK(std::abs(r.per_record[i].mnd - expect[i]) <= 1e-9);
  const double mean = std::accumulate(expect.begin(), expect.end(), 0.0) / 200.0;
  CHECK(std::abs(r.mean - mean) <= 1e-9);
}

TEST_CASE("MND: shuffling permutes results and keeps the mean") {
  Rng rng(4);
  std::vector<EmbeddingVector> vs;
  for (int i = 0; i < 60; ++i) vs.push_back({MockTransport::mock_embedding("m", std::to_string(i), 8)});
  const auto base = min_neighbor_distances(vs, ids(60));
  std::vector<std::size_t> perm(60);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_below(i + 1)]);
  std::vector<EmbeddingVector> shuffled;
  std::vector<std::string> shuffled_ids;
  for (auto p : perm) {
    shuffled.push_back(vs[p]);
    shuffled_ids.push_back("r" + std::to_string(p));
  }
  const auto r = min_neighbor_distances(shuffled, shuffled_ids);
  for (std::size_t i = 0; i < 60; ++i) {
    CHECK(r.per_record[i].record_id == shuffled_ids[i]);
    CHECK(r.per_record[i].mnd == base.per_record[perm[i]].mnd);
  }
  CHECK(std::abs(r.mean - base.mean) <= 1e-12);
}

TEST_CASE("MND: approximate mode is flagged and never below the exact value") {
  std::vector<EmbeddingVector> vs;
  for (int i = 0; i < 120; ++i) vs.push_back({MockTransport::mock_embedding("m", std::to_string(i), 8)});
  MndOptions opts;
  opts.approximate = true;
  const auto approx = min_neighbor_distances(vs, ids(120), "", opts);
  const auto exact = min_neighbor_distances(vs, ids(120));
  CHECK(approx.approximate);
  for (std::size_t i = 0; i < 120; ++i) CHECK(approx.per_record[i].mnd >= exact.per_record[i].mnd - 1e-12);
}

TEST_CASE("MND preconditions") {
  std::vector<EmbeddingVector> one = {{{1.0}}};
  CHECK_THROWS_AS(min_neighbor_distances(one, ids(1)), Error);
  std::vector<EmbeddingVector> mixed = {{{1.0}}, {{1.0, 2.0}}};
  CHECK_THROWS_AS(min_neighbor_distances(mixed, ids(2)), Error);
}

TEST_CASE("MND through the embedding gateway matches precomputed vectors") {
  auto emb = make_gateway(BackendKind::kEmbedding, std::make_shared<MockTransport>());
  std::vector<AuditRecord> recs;
  std::vector<EmbeddingVector> vs;
  for (int i = 0; i < 30; ++i) {
    recs.push_back({"r" + std::to_string(i), "instruction " + std::to_string(i), std::nullopt});
    vs.push_back({MockTransport::mock_embedding("test-model", recs.back().instruction, 64)});
  }
  const auto a = min_neighbor_distances(recs, *emb, "d", {}, 4);
  const auto b = min_neighbor_distances(vs, ids(30), "d");
  for (std::size_t i = 0; i < 30; ++i) CHECK(a.per_record[i].mnd == b.per_record[i].mnd);
}

TEST_CASE("lengths: 'a b c' has instruction mean 3; empty response counts 0") {
  WhitespaceTokenCounter wc;
  const auto s = length_stats({{"r", "a b c", std::string("")}}, wc);
  CHECK(s.instruction.mean == 3.0);
  REQUIRE(s.response.has_value());
  CHECK(s.response->mean == 0.0);
  CHECK(s.tokenizer_id == "whitespace-approx");
  CHECK_THROWS_AS(length_stats({}, wc), Error);
}

TEST_CASE("lengths: 100 records match the quantile oracle") {
  Rng rng(12);
  std::vector<AuditRecord> recs;
  std::vector<double> ins, res;
  for (int i = 0; i < 100; ++i) {
    const auto a = 1 + rng.uniform_below(60);
    const auto b = rng.uniform_below(400);
    std::string ti, tr;
    for (std::uint64_t w = 0; w < a; ++w) ti += "w ";
    for (std::uint64_t w = 0; w < b; ++w) tr += "\tx";
    recs.push_back({"r" + std::to_string(i), ti, tr});
    ins.push_back(static_cast<double>(a));
    res.push_back(static_cast<double>(b));
  }
  WhitespaceTokenCounter wc;
  const auto s = length_stats(recs, wc);
  CHECK(s.instruction.count == 100);
  CHECK(s.instruction.mean == doctest::Approx(std::accumulate(ins.begin(), ins.end(), 0.0) / 100));
  CHECK(s.instruction.median == doctest::Approx(quantile_oracle(ins, 0.5)));
  CHECK(s.instruction.p95 == doctest::Approx(quantile_oracle(ins, 0.95)));
  CHECK(s.instruction.max == static_cast<std::size_t>(*std::max_element(ins.begin(), ins.end())));
  REQUIRE(s.response.has_value());
  CHECK(s.response->median == doctest::Approx(quantile_oracle(res, 0.5)));
  CHECK(s.response->p95 == doctest::Approx(quantile_oracle(res, 0.95)));
}

TEST_CASE("lengths: response stats absent when no record has a response") {
  WhitespaceTokenCounter wc;
  CHECK_FALSE(length_stats({{"r", "x y", std::nullopt}}, wc).response.has_value());
}

TEST_CASE("remote token counter speaks {model, text} -> {count}") {
  auto t = std::make_shared<testing::ScriptedTransport>(
      std::vector<HttpResponse>{{200, "{\"count\": 424}", ""}, {200, "{\"n\": 1}", ""}});
  RemoteTokenCounter rc(t, "http://localhost:9/count", "tok");
  CHECK(rc.count("hello") == 424);
  const auto body = Json::parse(t->requests().at(0).body);
  CHECK(body.at("model") == "tok");
  CHECK(body.at("text") == "hello");
  CHECK_THROWS_AS(rc.count("x"), Error);
  CHECK(rc.id() == "remote:tok");
}

TEST_CASE("judge score grammar table") {
  for (const auto& c : testing::judge_score_cases()) {
    CAPTURE(c.reply);
    if (c.expected) {
      CHECK(parse_judge_score(c.reply) == *c.expected);
    } else {
      CHECK_THROWS_AS(parse_judge_score(c.reply), Error);
    }
  }
  CHECK(testing::judge_score_cases().size() == 30);
}

TEST_CASE("judge_score: replies 7, Score: 8 and eleven") {
  auto t = std::make_shared<testing::PinnedJudgeTransport>();
  auto judge = make_gateway(BackendKind::kGeneration, t);
  const AuditRecord rec{"r1", "Prove it.", std::string("Proof.")};
  t->difficulty_reply = "7";
  CHECK(judge_score(rec, JudgeMetric::kDifficulty, *judge).score == 7);
  t->difficulty_reply = "Score: 8";
  const auto v = judge_score(rec, JudgeMetric::kDifficulty, *judge, "ds");
  CHECK(v.score == 8);
  CHECK(v.raw_reply == "Score: 8");
  CHECK(v.dataset_id == "ds");
  CHECK(v.prompt_digest == sha256_hex(fixtures::judge_difficulty_prompt()));
  t->difficulty_reply = "eleven";
  try {
    judge_score(rec, JudgeMetric::kDifficulty, *judge);
    FAIL("expected scoring error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kScoring);
  }
  CHECK_THROWS_AS(judge_score({"r2", "x", std::nullopt}, JudgeMetric::kQuality, *judge), Error);
}

TEST_CASE("judge system prompts on the wire are the fixture bytes") {
  auto t = std::make_shared<testing::PinnedJudgeTransport>();
  auto judge = make_gateway(BackendKind::kGeneration, t);
  const AuditRecord rec{"r1", "Prove it.", std::string("Proof.")};
  for (auto m : kAllJudgeMetrics) judge_score(rec, m, *judge);
  const auto sent = t->system_prompts();
  REQUIRE(sent.size() == 3);
  const std::string_view fx[] = {fixtures::judge_difficulty_prompt(),
                                 fixtures::judge_feasibility_prompt(),
                                 fixtures::judge_quality_prompt()};
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(sha256_hex(sent[i]) == sha256_hex(fx[i]));
    CHECK(sent[i].find("respond with ONLY a single number") != std::string::npos);
    const auto on_disk = read_file(std::string(EXPERTSYNTH_FIXTURE_DIR) + "/judge_" +
                                   std::string(judge_metric_name(kAllJudgeMetrics[i])) + ".txt");
    CHECK(sha256_hex(on_disk) == sha256_hex(fx[i]));
  }
}

TEST_CASE("judge_dataset collects failures and skips quality without a response") {
  auto t = std::make_shared<testing::PinnedJudgeTransport>();
  t->feasibility_reply = "unsure";
  auto judge = make_gateway(BackendKind::kGeneration, t);
  std::vector<AuditRecord> recs = {{"a", "one", std::string("resp")}, {"b", "two", std::nullopt}};
  const auto run = judge_dataset(recs, kAllJudgeMetrics, *judge, "d", 2);
  // difficulty x2 + quality x1 succeed; feasibility x2 fail.
  CHECK(run.verdicts.size() == 3);
  CHECK(run.failures.size() == 2);
  for (const auto& v : run.verdicts) CHECK((v.score >= 1 && v.score <= 10));
}

TEST_CASE("report: constant verdicts give mean 7 and all mass at bin 7") {
  std::vector<JudgeVerdict> vs;
  for (int i = 0; i < 12; ++i) vs.push_back(verdict(JudgeMetric::kDifficulty, 7, std::to_string(i)));
  const auto r = build_report("d", std::nullopt, std::nullopt, vs);
  const auto& s = r.score_summaries.at("difficulty");
  CHECK(s.mean == 7.0);
  CHECK(s.count == 12);
  for (std::size_t b = 0; b < 10; ++b) CHECK(s.histogram[b] == (b == 6 ? 12u : 0u));
}

TEST_CASE("report: metrics without verdicts are omitted and noted") {
  const auto r = build_report("d", std::nullopt, std::nullopt,
                              {verdict(JudgeMetric::kDifficulty, 5)});
  CHECK(r.score_summaries.count("feasibility") == 0);
  CHECK(r.score_summaries.count("quality") == 0);
  const bool noted = std::any_of(r.notes.begin(), r.notes.end(), [](const std::string& n) {
    return n.find("feasibility") != std::string::npos;
  });
  CHECK(noted);
}

TEST_CASE("report: deltas against a baseline equal direct subtraction") {
  MndResult mnd;
  mnd.mean = 0.497;
  LengthStats len;
  len.instruction.mean = 424.0;
  len.response = FieldLengthStats{};
  len.response->mean = 5305.0;
  AuditReport base;
  base.dataset_id = "base";
  base.mnd = MndResult{};
  base.mnd->mean = 0.598;
  base.lengths = LengthStats{};
  base.lengths->instruction.mean = 100.0;
  base.lengths->response = FieldLengthStats{};
  base.lengths->response->mean = 1000.0;
  base.score_summaries["difficulty"].count = 4;
  base.score_summaries["difficulty"].mean = 5.5;
  const auto r = build_report("d", mnd, len,
                              {verdict(JudgeMetric::kDifficulty, 8), verdict(JudgeMetric::kDifficulty, 6)},
                              &base);
  CHECK(r.baseline_id == std::optional<std::string>("base"));
  CHECK(r.deltas.at("mnd_mean") == 0.497 - 0.598);
  CHECK(r.deltas.at("instruction_mean_tokens") == 424.0 - 100.0);
  CHECK(r.deltas.at("response_mean_tokens") == 5305.0 - 1000.0);
  CHECK(r.deltas.at("difficulty_mean") == 7.0 - 5.5);
}

TEST_CASE("report preconditions") {
  CHECK_THROWS_AS(build_report("d", std::nullopt, std::nullopt, {verdict(JudgeMetric::kQuality, 0)}),
                  Error);
  auto other = verdict(JudgeMetric::kQuality, 5);
  other.dataset_id = "elsewhere";
  CHECK_THROWS_AS(build_report("d", std::nullopt, std::nullopt, {other}), Error);
}

TEST_CASE("report JSON round-trips the comparison fields and renders markdown") {
  std::vector<EmbeddingVector> vs = {{{0, 0}}, {{3, 4}}, {{6, 8}}};
  const auto mnd = min_neighbor_distances(vs, ids(3), "d");
  WhitespaceTokenCounter wc;
  const auto len = length_stats({{"r", "a b", std::string("c d e")}}, wc, "d");
  const auto r = build_report("d", mnd, len, {verdict(JudgeMetric::kQuality, 9)});
  const auto back = report_from_json(report_to_json(r));
  CHECK(back.dataset_id == "d");
  CHECK(back.mnd->mean == 5.0);
  CHECK(back.lengths->instruction.mean == 2.0);
  CHECK(back.score_summaries.at("quality").mean == 9.0);
  const auto md = render_markdown(r);
  CHECK(md.find("d") != std::string::npos);
  CHECK(md.find("quality") != std::string::npos);
}

TEST_CASE("field mapping reads foreign schemas") {
  const std::string content =
      "{\"uid\":\"x1\",\"conversations\":[{\"value\":\"Q1\"},{\"value\":\"A1\"}]}\n"
      "{\"uid\":\"x2\",\"conversations\":[{\"value\":\"Q2\"},{\"value\":\"A2\"}]}\n";
  const auto m = FieldMapping::from_json(
      Json{{"id", "uid"}, {"instruction", "/conversations/0/value"}, {"response", "/conversations/1/value"}});
  const auto recs = load_audit_records(content, m);
  REQUIRE(recs.size() == 2);
  CHECK(recs[1].record_id == "x2");
  CHECK(recs[1].instruction == "Q2");
  CHECK(recs[1].response == std::optional<std::string>("A2"));
  const auto plain = load_audit_records("{\"instruction\":\"q\"}\n");
  CHECK(plain[0].record_id == "rec-1");
  CHECK_FALSE(plain[0].response.has_value());
  CHECK_THROWS_AS(load_audit_records("{\"response\":\"r\"}\n"), Error);
}
