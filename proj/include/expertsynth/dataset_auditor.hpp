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

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expertsynth/backend.hpp"
#include "expertsynth/gateway.hpp"
#include "expertsynth/jsonl.hpp"

namespace expertsynth {

// ---------------------------------------------------------------------------
// Input records

struct AuditRecord {
  std::string record_id;
  std::string instruction;
  std::optional<std::string> response;
};

// Where to find each field in a foreign JSONL schema. A value starting with
// '/' is a JSON pointer (e.g. "/conversations/0/value"), anything else is a
// top-level key. An empty id path numbers records "rec-<line>".
struct FieldMapping {
  std::string id;
  std::string instruction = "instruction";
  std::string response = "response";

  static FieldMapping from_json(const Json& j);
};

std::vector<AuditRecord> load_audit_records(std::string_view content,
                                            const FieldMapping& mapping = {});
std::vector<AuditRecord> load_audit_records_file(const std::filesystem::path& path,
                                                 const FieldMapping& mapping = {});

// ---------------------------------------------------------------------------
// Minimum neighbor distance

struct Histogram {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::size_t> counts;
};

// Equal-width bins over [lower, upper]; the upper edge falls in the last bin.
Histogram make_histogram(std::span<const double> values, double lower, double upper,
                         std::size_t bins);

struct MndEntry {
  std::string record_id;
  double mnd = 0.0;
};

struct MndResult {
  std::string dataset_id;
  std::vector<MndEntry> per_record;
  double mean = 0.0;
  double max = 0.0;
  bool approximate = false;
  Histogram histogram;  // 50 bins over [0, max]
};

struct MndOptions {
  std::size_t histogram_bins = 50;
  // Random-hyperplane bucketing instead of the exact all-pairs scan. The
  // result is an upper bound on the exact value. Not used for accuracy work.
  bool approximate = false;
  std::size_t approx_tables = 8;
  std::size_t approx_bits = 6;
};

// Exact all-pairs minimum L2 distance from each vector to any other.
// kContract with fewer than two vectors, kConsistency on mixed dims.
MndResult min_neighbor_distances(std::span<const EmbeddingVector> embeddings,
                                 std::span<const std::string> record_ids,
                                 std::string_view dataset_id = {}, const MndOptions& options = {});

// Embeds every instruction through `embedder` first.
MndResult min_neighbor_distances(const std::vector<AuditRecord>& records, Gateway& embedder,
                                 std::string_view dataset_id = {}, const MndOptions& options = {},
                                 std::size_t max_in_flight = 1);

// ---------------------------------------------------------------------------
// Length statistics

class TokenCounter {
 public:
  virtual ~TokenCounter() = default;
  virtual std::string id() const = 0;
  virtual std::size_t count(std::string_view text) = 0;
};

// Whitespace-separated words. Approximate; not comparable to model tokenizers.
class WhitespaceTokenCounter final : public TokenCounter {
 public:
  std::string id() const override { return "whitespace-approx"; }
  std::size_t count(std::string_view text) override;
};

// Delegates to a tokenizer service: POST {"model", "text"} -> {"count"}.
class RemoteTokenCounter final : public TokenCounter {
 public:
  RemoteTokenCounter(std::shared_ptr<Transport> transport, std::string endpoint,
                     std::string model);
  std::string id() const override { return "remote:" + model_; }
  std::size_t count(std::string_view text) override;

 private:
  std::shared_ptr<Transport> transport_;
  std::string endpoint_;
  std::string model_;
};

struct FieldLengthStats {
  std::size_t count = 0;  // records measured
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
  std::size_t max = 0;
};

struct LengthStats {
  std::string dataset_id;
  std::string tokenizer_id;
  FieldLengthStats instruction;
  std::optional<FieldLengthStats> response;  // absent when no record has one
};

// Linear interpolation between closest ranks over sorted values.
double quantile_sorted(std::span<const double> sorted, double q);

LengthStats length_stats(const std::vector<AuditRecord>& records, TokenCounter& counter,
                         std::string_view dataset_id = {});

// ---------------------------------------------------------------------------
// Judge scoring

enum class JudgeMetric { kDifficulty, kFeasibility, kQuality };

inline constexpr std::array<JudgeMetric, 3> kAllJudgeMetrics = {
    JudgeMetric::kDifficulty, JudgeMetric::kFeasibility, JudgeMetric::kQuality};

std::string_view judge_metric_name(JudgeMetric metric);
JudgeMetric parse_judge_metric(std::string_view name);

// The rubric sent as the system prompt, byte-identical to the fixture file.
std::string_view judge_system_prompt(JudgeMetric metric);
std::string judge_user_prompt(JudgeMetric metric, std::string_view instruction,
                              std::optional<std::string_view> response);

// Strict: the trimmed reply is an integer 1..10. Fallback: the first integer
// token in 1..10 (decimals and signed numbers are skipped). Otherwise kParse.
int parse_judge_score(std::string_view raw);

struct JudgeVerdict {
  std::string dataset_id;
  std::string record_id;
  JudgeMetric metric = JudgeMetric::kDifficulty;
  int score = 0;
  std::string raw_reply;
  std::string prompt_digest;
};

// One judge call. kContract when quality is requested without a response;
// kScoring when the reply has no usable score.
JudgeVerdict judge_score(const AuditRecord& record, JudgeMetric metric, Gateway& judge,
                         std::string_view dataset_id = {});

struct ScoringFailure {
  std::string record_id;
  JudgeMetric metric = JudgeMetric::kDifficulty;
  std::string message;
};

struct JudgeRun {
  std::vector<JudgeVerdict> verdicts;
  std::vector<ScoringFailure> failures;
};

// Scores every (record, metric). Failures are collected per record and do
// not stop the run; quality is skipped for records without a response.
JudgeRun judge_dataset(const std::vector<AuditRecord>& records,
                       std::span<const JudgeMetric> metrics, Gateway& judge,
                       std::string_view dataset_id = {}, std::size_t max_in_flight = 4);

// ---------------------------------------------------------------------------
// Report

struct ScoreSummary {
  std::size_t count = 0;
  double mean = 0.0;
  std::array<std::size_t, 10> histogram{};  // index s-1 counts score s
};

struct AuditReport {
  std::string dataset_id;
  std::optional<MndResult> mnd;
  std::optional<LengthStats> lengths;
  std::map<std::string, ScoreSummary> score_summaries;  // keyed by metric name
  std::vector<ScoringFailure> scoring_failures;
  std::vector<std::string> notes;
  std::optional<std::string> baseline_id;
  std::map<std::string, double> deltas;  // this minus baseline
};

AuditReport build_report(std::string_view dataset_id, const std::optional<MndResult>& mnd,
                         const std::optional<LengthStats>& lengths,
                         const std::vector<JudgeVerdict>& verdicts,
                         const AuditReport* baseline = nullptr,
                         std::vector<ScoringFailure> failures = {});

Json report_to_json(const AuditReport& report);
// Reads the summary fields back (per-record MND values are not needed for
// baseline comparison and are skipped).
AuditReport report_from_json(const Json& j);
std::string render_markdown(const AuditReport& report);

}  // namespace expertsynth
