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


#include "expertsynth/dataset_auditor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "expertsynth/error.hpp"
#include "expertsynth/fixtures.hpp"
#include "expertsynth/hashing.hpp"
#include "expertsynth/parallel.hpp"
#include "expertsynth/persona_store.hpp"

namespace expertsynth {
namespace {

const Json* lookup(const Json& record, const std::string& path) {
  if (path.empty()) return nullptr;
  if (path.front() == '/') {
    try {
      const Json::json_pointer pointer(path);
      return record.contains(pointer) ? &record.at(pointer) : nullptr;
    } catch (const Json::exception&) {
      return nullptr;
    }
  }
  auto it = record.find(path);
  return it == record.end() ? nullptr : &*it;
}

bool is_ascii_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_ascii_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::optional<int> small_int(std::string_view digits) {
  // Anything longer than two digits (after leading zeros) is out of range.
  const auto first = digits.find_first_not_of('0');
  if (first == std::string_view::npos) return 0;
  digits.remove_prefix(first);
  if (digits.size() > 2) return std::nullopt;
  int value = 0;
  for (char c : digits) value = value * 10 + (c - '0');
  return value;
}

FieldLengthStats summarize_counts(std::vector<double> counts) {
  FieldLengthStats s;
  s.count = counts.size();
  if (counts.empty()) return s;
  std::sort(counts.begin(), counts.end());
  s.mean = std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(counts.size());
  s.median = quantile_sorted(counts, 0.5);
  s.p95 = quantile_sorted(counts, 0.95);
  s.max = static_cast<std::size_t>(counts.back());
  return s;
}

Json histogram_json(const Histogram& h) {
  return Json{{"lower", h.lower}, {"upper", h.upper}, {"counts", h.counts}};
}

Json field_stats_json(const FieldLengthStats& s) {
  return Json{{"count", s.count}, {"mean", s.mean}, {"median", s.median},
              {"p95", s.p95},     {"max", s.max}};
}

FieldLengthStats field_stats_from_json(const Json& j) {
  FieldLengthStats s;
  s.count = j.value("count", std::size_t{0});
  s.mean = j.value("mean", 0.0);
  s.median = j.value("median", 0.0);
  s.p95 = j.value("p95", 0.0);
  s.max = j.value("max", std::size_t{0});
  return s;
}

void adopt_dataset_id(std::string& expected, const std::string& candidate,
                      std::string_view what) {
  if (candidate.empty()) return;
  if (expected.empty()) {
    expected = candidate;
  } else if (expected != candidate) {
    throw Error(ErrorCode::kConsistency, std::string(what) + " belongs to dataset '" +
                                             candidate + "', expected '" + expected + "'");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

FieldMapping FieldMapping::from_json(const Json& j) {
  FieldMapping m;
  m.id = j.value("id", m.id);
  m.instruction = j.value("instruction", m.instruction);
  m.response = j.value("response", m.response);
  return m;
}

std::vector<AuditRecord> load_audit_records(std::string_view content,
                                            const FieldMapping& mapping) {
  std::vector<AuditRecord> out;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_jsonl(content, [&](const Json& record, std::size_t line) {
    if (!record.is_object()) throw Error(ErrorCode::kParse, "record is not an object", line);
    const Json* instruction = lookup(record, mapping.instruction);
    if (instruction == nullptr || !instruction->is_string()) {
      throw Error(ErrorCode::kParse, "no string at '" + mapping.instruction + "'", line);
    }
    AuditRecord r;
    r.instruction = instruction->get<std::string>();
    if (const Json* response = lookup(record, mapping.response);
        response != nullptr && !response->is_null()) {
      if (!response->is_string()) {
        throw Error(ErrorCode::kParse, "non-string at '" + mapping.response + "'", line);
      }
      r.response = response->get<std::string>();
    }
    if (const Json* id = lookup(record, mapping.id); id != nullptr && !id->is_null()) {
      r.record_id = id->is_string() ? id->get<std::string>() : id->dump();
    } else {
      r.record_id = "rec-" + std::to_string(line);
    }
    if (!seen.emplace(r.record_id, line).second) {
      throw Error(ErrorCode::kConflict, "duplicate record id '" + r.record_id + "'", line);
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<AuditRecord> load_audit_records_file(const std::filesystem::path& path,
                                                 const FieldMapping& mapping) {
  return load_audit_records(read_file(path), mapping);
}

// ---------------------------------------------------------------------------

Histogram make_histogram(std::span<const double> values, double lower, double upper,
                         std::size_t bins) {
  Histogram h;
  h.lower = lower;
  h.upper = upper;
  h.counts.assign(std::max<std::size_t>(1, bins), 0);
  const double width = upper - lower;
  for (double v : values) {
    std::size_t idx = 0;
    if (width > 0) {
      const double pos = (v - lower) / width * static_cast<double>(h.counts.size());
      idx = pos <= 0 ? 0 : std::min(h.counts.size() - 1, static_cast<std::size_t>(pos));
    }
    ++h.counts[idx];
  }
  return h;
}

MndResult min_neighbor_distances(std::span<const EmbeddingVector> embeddings,
                                 std::span<const std::string> record_ids,
                                 std::string_view dataset_id, const MndOptions& options) {
  const std::size_t n = embeddings.size();
  if (n < 2) throw Error(ErrorCode::kContract, "minimum neighbor distance needs >= 2 records");
  if (record_ids.size() != n) {
    throw Error(ErrorCode::kContract, "record id count does not match embedding count");
  }
  const std::size_t dim = embeddings[0].dim();
  for (const auto& e : embeddings) {
    if (e.dim() != dim || dim == 0) {
      throw Error(ErrorCode::kConsistency, "embeddings have inconsistent dimensions");
    }
  }

  std::vector<double> mins(n, std::numeric_limits<double>::infinity());
  if (!options.approximate) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = l2_distance(embeddings[i], embeddings[j]);
        mins[i] = std::min(mins[i], d);
        mins[j] = std::min(mins[j], d);
      }
    }
  } else {
    // Each table hashes a vector to the sign pattern of `approx_bits` random
    // projections; only bucket mates are compared.
    Rng rng(0x6d6e6461707078ULL);
    const std::size_t tables = std::max<std::size_t>(1, options.approx_tables);
    const std::size_t bits = std::clamp<std::size_t>(options.approx_bits, 1, 63);
    std::vector<std::vector<std::size_t>> neighbours(n);
    for (std::size_t t = 0; t < tables; ++t) {
      std::vector<std::vector<double>> planes(bits, std::vector<double>(dim));
      for (auto& plane : planes) {
        for (auto& x : plane) x = 2.0 * rng.uniform01() - 1.0;
      }
      std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets;
      for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t key = 0;
        for (std::size_t b = 0; b < bits; ++b) {
          double dot = 0.0;
          for (std::size_t k = 0; k < dim; ++k) dot += planes[b][k] * embeddings[i].values[k];
          key = (key << 1) | (dot >= 0 ? 1u : 0u);
        }
        buckets[key].push_back(i);
      }
      for (const auto& [key, members] : buckets) {
        for (std::size_t a : members) {
          for (std::size_t b : members) {
            if (a != b) neighbours[a].push_back(b);
          }
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (neighbours[i].empty()) {
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) mins[i] = std::min(mins[i], l2_distance(embeddings[i], embeddings[j]));
        }
      } else {
        for (std::size_t j : neighbours[i]) {
          mins[i] = std::min(mins[i], l2_distance(embeddings[i], embeddings[j]));
        }
      }
    }
  }

  MndResult result;
  result.dataset_id = std::string(dataset_id);
  result.approximate = options.approximate;
  result.per_record.reserve(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    result.per_record.push_back({record_ids[i], mins[i]});
    sum += mins[i];
    result.max = std::max(result.max, mins[i]);
  }
  result.mean = sum / static_cast<double>(n);
  result.histogram = make_histogram(mins, 0.0, result.max, options.histogram_bins);
  return result;
}

MndResult min_neighbor_distances(const std::vector<AuditRecord>& records, Gateway& embedder,
                                 std::string_view dataset_id, const MndOptions& options,
                                 std::size_t max_in_flight) {
  if (records.size() < 2) {
    throw Error(ErrorCode::kContract, "minimum neighbor distance needs >= 2 records");
  }
  std::vector<EmbeddingVector> embeddings(records.size());
  std::vector<std::string> ids(records.size());
  parallel_for(records.size(), max_in_flight, [&](std::size_t i) {
    embeddings[i] = embedder.embed_text(records[i].instruction);
    ids[i] = records[i].record_id;
  });
  return min_neighbor_distances(embeddings, ids, dataset_id, options);
}

// ---------------------------------------------------------------------------

std::size_t WhitespaceTokenCounter::count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

RemoteTokenCounter::RemoteTokenCounter(std::shared_ptr<Transport> transport,
                                       std::string endpoint, std::string model)
    : transport_(std::move(transport)), endpoint_(std::move(endpoint)), model_(std::move(model)) {}

std::size_t RemoteTokenCounter::count(std::string_view text) {
  HttpRequest request;
  request.url = endpoint_;
  request.headers.emplace_back("Content-Type", "application/json");
  request.body = dump_line(Json{{"model", model_}, {"text", std::string(text)}});
  const auto response = transport_->post(request);
  if (response.status != 200) {
    throw Error(ErrorCode::kTransport, "tokenizer endpoint failed: HTTP " +
                                           std::to_string(response.status) + " " + response.error);
  }
  Json body;
  try {
    body = Json::parse(response.body);
  } catch (const Json::parse_error&) {
    throw Error(ErrorCode::kProtocol, "tokenizer returned non-JSON body");
  }
  if (!body.is_object() || !body.contains("count") || !body["count"].is_number_unsigned()) {
    throw Error(ErrorCode::kProtocol, "tokenizer response lacks non-negative integer 'count'");
  }
  return body["count"].get<std::size_t>();
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorCode::kContract, "quantile of empty sample");
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

LengthStats length_stats(const std::vector<AuditRecord>& records, TokenCounter& counter,
                         std::string_view dataset_id) {
  if (records.empty()) throw Error(ErrorCode::kContract, "length statistics of empty dataset");
  std::vector<double> instruction_counts, response_counts;
  instruction_counts.reserve(records.size());
  for (const auto& r : records) {
    instruction_counts.push_back(static_cast<double>(counter.count(r.instruction)));
    if (r.response) response_counts.push_back(static_cast<double>(counter.count(*r.response)));
  }
  LengthStats stats;
  stats.dataset_id = std::string(dataset_id);
  stats.tokenizer_id = counter.id();
  stats.instruction = summarize_counts(std::move(instruction_counts));
  if (!response_counts.empty()) stats.response = summarize_counts(std::move(response_counts));
  return stats;
}

// ---------------------------------------------------------------------------

std::string_view judge_metric_name(JudgeMetric metric) {
  switch (metric) {
    case JudgeMetric::kDifficulty: return "difficulty";
    case JudgeMetric::kFeasibility: return "feasibility";
    case JudgeMetric::kQuality: return "quality";
  }
  return "unknown";
}

JudgeMetric parse_judge_metric(std::string_view name) {
  for (auto metric : kAllJudgeMetrics) {
    if (judge_metric_name(metric) == name) return metric;
  }
  throw Error(ErrorCode::kConfiguration, "unknown judge metric '" + std::string(name) + "'");
}

std::string_view judge_system_prompt(JudgeMetric metric) {
  switch (metric) {
    case JudgeMetric::kDifficulty: return fixtures::judge_difficulty_prompt();
    case JudgeMetric::kFeasibility: return fixtures::judge_feasibility_prompt();
    case JudgeMetric::kQuality: return fixtures::judge_quality_prompt();
  }
  return {};
}

std::string judge_user_prompt(JudgeMetric metric, std::string_view instruction,
                              std::optional<std::string_view> response) {
  std::string prompt = "Instruction:\n";
  prompt.append(instruction);
  if (metric == JudgeMetric::kQuality) {
    if (!response) throw Error(ErrorCode::kContract, "quality scoring needs a response");
    prompt.append("\n\nResponse:\n");
    prompt.append(*response);
  }
  return prompt;
}

int parse_judge_score(std::string_view raw) {
  const auto trimmed = trim(raw);
  if (!trimmed.empty() && std::all_of(trimmed.begin(), trimmed.end(), is_ascii_digit)) {
    if (auto v = small_int(trimmed); v && *v >= 1 && *v <= 10) return *v;
  }
  // Fallback: scan integer tokens left to right.
  std::size_t i = 0;
  while (i < raw.size()) {
    if (!is_ascii_digit(raw[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < raw.size() && is_ascii_digit(raw[i])) ++i;
    const auto digits = raw.substr(start, i - start);
    bool is_integer_token = true;
    if (i + 1 < raw.size() && raw[i] == '.' && is_ascii_digit(raw[i + 1])) {
      is_integer_token = false;  // decimal such as 7.5
      ++i;
      while (i < raw.size() && is_ascii_digit(raw[i])) ++i;
    }
    if (start > 0 && is_ascii_alpha(raw[start - 1])) is_integer_token = false;
    if (i < raw.size() && is_ascii_alpha(raw[i])) is_integer_token = false;
    if (start > 0 && raw[start - 1] == '-' &&
        (start == 1 || !std::isalnum(static_cast<unsigned char>(raw[start - 2])))) {
      is_integer_token = false;  // negative number
    }
    if (!is_integer_token) continue;
    if (auto v = small_int(digits); v && *v >= 1 && *v <= 10) return *v;
  }
  throw Error(ErrorCode::kParse, "no score in 1..10 found in judge reply: \"" +
                                     std::string(raw.substr(0, 80)) + "\"");
}

JudgeVerdict judge_score(const AuditRecord& record, JudgeMetric metric, Gateway& judge,
                         std::string_view dataset_id) {
  GenerationRequest request;
  request.system_prompt = std::string(judge_system_prompt(metric));
  std::optional<std::string_view> response;
  if (record.response) response = *record.response;
  request.user_prompt = judge_user_prompt(metric, record.instruction, response);
  request.temperature = 0.0;
  request.max_tokens = 16;

  JudgeVerdict verdict;
  verdict.dataset_id = std::string(dataset_id);
  verdict.record_id = record.record_id;
  verdict.metric = metric;
  verdict.prompt_digest = sha256_hex(request.system_prompt);
  verdict.raw_reply = judge.generate_text(request).text;
  try {
    verdict.score = parse_judge_score(verdict.raw_reply);
  } catch (const Error& e) {
    throw Error(ErrorCode::kScoring, record.record_id + "/" +
                                         std::string(judge_metric_name(metric)) + ": " + e.what());
  }
  return verdict;
}

JudgeRun judge_dataset(const std::vector<AuditRecord>& records,
                       std::span<const JudgeMetric> metrics, Gateway& judge,
                       std::string_view dataset_id, std::size_t max_in_flight) {
  struct Task {
    const AuditRecord* record;
    JudgeMetric metric;
  };
  std::vector<Task> tasks;
  for (const auto& r : records) {
    for (auto m : metrics) {
      if (m == JudgeMetric::kQuality && !r.response) continue;
      tasks.push_back({&r, m});
    }
  }
  std::vector<std::optional<JudgeVerdict>> verdicts(tasks.size());
  std::vector<std::optional<ScoringFailure>> failures(tasks.size());
  parallel_for(tasks.size(), max_in_flight, [&](std::size_t i) {
    try {
      verdicts[i] = judge_score(*tasks[i].record, tasks[i].metric, judge, dataset_id);
    } catch (const Error& e) {
      failures[i] = ScoringFailure{tasks[i].record->record_id, tasks[i].metric, e.what()};
    }
  });
  JudgeRun run;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (verdicts[i]) run.verdicts.push_back(std::move(*verdicts[i]));
    if (failures[i]) run.failures.push_back(std::move(*failures[i]));
  }
  return run;
}

// ---------------------------------------------------------------------------

AuditReport build_report(std::string_view dataset_id, const std::optional<MndResult>& mnd,
                         const std::optional<LengthStats>& lengths,
                         const std::vector<JudgeVerdict>& verdicts, const AuditReport* baseline,
                         std::vector<ScoringFailure> failures) {
  std::string id(dataset_id);
  if (mnd) adopt_dataset_id(id, mnd->dataset_id, "MND result");
  if (lengths) adopt_dataset_id(id, lengths->dataset_id, "length statistics");
  for (const auto& v : verdicts) adopt_dataset_id(id, v.dataset_id, "verdict " + v.record_id);

  AuditReport report;
  report.dataset_id = id;
  report.mnd = mnd;
  report.lengths = lengths;
  report.scoring_failures = std::move(failures);

  for (const auto& v : verdicts) {
    if (v.score < 1 || v.score > 10) {
      throw Error(ErrorCode::kContract, "judge score out of range for " + v.record_id);
    }
    auto& summary = report.score_summaries[std::string(judge_metric_name(v.metric))];
    ++summary.count;
    ++summary.histogram[static_cast<std::size_t>(v.score - 1)];
  }
  for (auto& [name, summary] : report.score_summaries) {
    double total = 0.0;
    for (std::size_t s = 0; s < summary.histogram.size(); ++s) {
      total += static_cast<double>((s + 1) * summary.histogram[s]);
    }
    summary.mean = total / static_cast<double>(summary.count);
  }
  for (auto metric : kAllJudgeMetrics) {
    const std::string name(judge_metric_name(metric));
    if (!report.score_summaries.contains(name)) {
      report.notes.push_back("no " + name + " verdicts; metric omitted from summaries");
    }
  }
  if (lengths && lengths->tokenizer_id == "whitespace-approx") {
    report.notes.push_back("token counts are whitespace-approximate");
  }
  if (mnd && mnd->approximate) report.notes.push_back("MND computed in approximate mode");

  if (baseline != nullptr) {
    report.baseline_id = baseline->dataset_id;
    if (mnd && baseline->mnd) report.deltas["mnd_mean"] = mnd->mean - baseline->mnd->mean;
    if (lengths && baseline->lengths) {
      report.deltas["instruction_mean_tokens"] =
          lengths->instruction.mean - baseline->lengths->instruction.mean;
      if (lengths->response && baseline->lengths->response) {
        report.deltas["response_mean_tokens"] =
            lengths->response->mean - baseline->lengths->response->mean;
      }
    }
    for (const auto& [name, summary] : report.score_summaries) {
      auto it = baseline->score_summaries.find(name);
      if (it != baseline->score_summaries.end()) {
        report.deltas[name + "_mean"] = summary.mean - it->second.mean;
      }
    }
  }
  return report;
}

Json report_to_json(const AuditReport& report) {
  Json j;
  j["dataset_id"] = report.dataset_id;
  if (report.mnd) {
    const auto& m = *report.mnd;
    Json per_record = Json::array();
    for (const auto& e : m.per_record) {
      per_record.push_back(Json{{"record_id", e.record_id}, {"mnd", e.mnd}});
    }
    j["mnd"] = Json{{"count", m.per_record.size()},   {"mean", m.mean},
                    {"max", m.max},                   {"approximate", m.approximate},
                    {"histogram", histogram_json(m.histogram)}, {"per_record", per_record}};
  }
  if (report.lengths) {
    const auto& l = *report.lengths;
    Json lengths{{"tokenizer_id", l.tokenizer_id}, {"instruction", field_stats_json(l.instruction)}};
    if (l.response) lengths["response"] = field_stats_json(*l.response);
    j["lengths"] = lengths;
  }
  Json scores = Json::object();
  for (const auto& [name, s] : report.score_summaries) {
    scores[name] = Json{{"count", s.count}, {"mean", s.mean}, {"histogram", s.histogram}};
  }
  j["scores"] = scores;
  Json failures = Json::array();
  for (const auto& f : report.scoring_failures) {
    failures.push_back(Json{{"record_id", f.record_id},
                            {"metric", judge_metric_name(f.metric)},
                            {"message", f.message}});
  }
  j["scoring_failures"] = failures;
  j["notes"] = report.notes;
  if (report.baseline_id) {
    Json deltas = Json::object();
    for (const auto& [k, v] : report.deltas) deltas[k] = v;
    j["baseline"] = Json{{"dataset_id", *report.baseline_id}, {"deltas", deltas}};
  }
  return j;
}

AuditReport report_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "audit report must be a JSON object");
  AuditReport r;
  r.dataset_id = j.value("dataset_id", std::string());
  try {
    if (j.contains("mnd")) {
      MndResult m;
      m.dataset_id = r.dataset_id;
      m.mean = j["mnd"].value("mean", 0.0);
      m.max = j["mnd"].value("max", 0.0);
      m.approximate = j["mnd"].value("approximate", false);
      r.mnd = m;
    }
    if (j.contains("lengths")) {
      LengthStats l;
      l.dataset_id = r.dataset_id;
      l.tokenizer_id = j["lengths"].value("tokenizer_id", std::string());
      l.instruction = field_stats_from_json(j["lengths"].at("instruction"));
      if (j["lengths"].contains("response")) {
        l.response = field_stats_from_json(j["lengths"]["response"]);
      }
      r.lengths = l;
    }
    if (j.contains("scores")) {
      for (const auto& [name, s] : j["scores"].items()) {
        ScoreSummary summary;
        summary.count = s.value("count", std::size_t{0});
        summary.mean = s.value("mean", 0.0);
        if (s.contains("histogram")) {
          for (std::size_t i = 0; i < 10 && i < s["histogram"].size(); ++i) {
            summary.histogram[i] = s["histogram"][i].get<std::size_t>();
          }
        }
        r.score_summaries[name] = summary;
      }
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed audit report: ") + e.what());
  }
  return r;
}

std::string render_markdown(const AuditReport& report) {
  std::ostringstream md;
  md.precision(4);
  md << std::fixed;
  md << "# Dataset audit: " << report.dataset_id << "\n\n";
  if (report.mnd) {
    md << "## Minimum neighbor distance\n\n"
       << "| records | mean | max |\n|---|---|---|\n"
       << "| " << report.mnd->per_record.size() << " | " << report.mnd->mean << " | "
       << report.mnd->max << " |\n\n";
  }
  if (report.lengths) {
    const auto& l = *report.lengths;
    md << "## Token lengths (" << l.tokenizer_id << ")\n\n"
       << "| field | records | mean | median | p95 | max |\n|---|---|---|---|---|---|\n";
    auto row = [&](std::string_view name, const FieldLengthStats& s) {
      md << "| " << name << " | " << s.count << " | " << s.mean << " | " << s.median << " | "
         << s.p95 << " | " << s.max << " |\n";
    };
    row("instruction", l.instruction);
    if (l.response) row("response", *l.response);
    md << "\n";
  }
  if (!report.score_summaries.empty()) {
    md << "## Judge scores (1-10)\n\n| metric | scored | mean |";
    for (int s = 1; s <= 10; ++s) md << " " << s << " |";
    md << "\n|---|---|---|";
    for (int s = 1; s <= 10; ++s) md << "---|";
    md << "\n";
    for (const auto& [name, s] : report.score_summaries) {
      md << "| " << name << " | " << s.count << " | " << s.mean << " |";
      for (auto c : s.histogram) md << " " << c << " |";
      md << "\n";
    }
    md << "\n";
  }
  if (report.baseline_id) {
    md << "## Compared with " << *report.baseline_id << "\n\n| quantity | delta |\n|---|---|\n";
    for (const auto& [k, v] : report.deltas) md << "| " << k << " | " << std::showpos << v
                                                << std::noshowpos << " |\n";
    md << "\n";
  }
  if (!report.scoring_failures.empty()) {
    md << "## Scoring failures\n\n";
    for (const auto& f : report.scoring_failures) {
      md << "- " << f.record_id << " (" << judge_metric_name(f.metric) << "): " << f.message
         << "\n";
    }
    md << "\n";
  }
  if (!report.notes.empty()) {
    md << "## Notes\n\n";
    for (const auto& n : report.notes) md << "- " << n << "\n";
  }
  return md.str();
}

}  // namespace expertsynth
