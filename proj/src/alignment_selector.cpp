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


#include "expertsynth/alignment_selector.hpp"

#include <chrono>
#include <ctime>
#include <optional>

#include "expertsynth/error.hpp"
#include "expertsynth/parallel.hpp"

namespace expertsynth {
namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string_view skip_reason_name(SkipReason reason) {
  return reason == SkipReason::kDegenerate ? "degenerate" : "below_margin";
}

Json scored_set_to_json(const ScoredCandidateSet& set) {
  Json scored = Json::array();
  for (const auto& c : set.scored) {
    scored.push_back(Json{{"index", c.index},
                          {"text", c.text},
                          {"score", c.score},
                          {"reward_backend_id", c.reward_backend_id}});
  }
  Json j;
  j["instruction_id"] = set.instruction_id;
  j["instruction"] = set.instruction;
  j["scored"] = std::move(scored);
  return j;
}

ScoredCandidateSet scored_set_from_json(const Json& j) {
  try {
    ScoredCandidateSet set;
    set.instruction_id = j.at("instruction_id").get<std::string>();
    set.instruction = j.at("instruction").get<std::string>();
    for (const auto& c : j.at("scored")) {
      set.scored.push_back(ScoredCandidate{c.at("index").get<std::size_t>(),
                                           c.at("text").get<std::string>(),
                                           c.at("score").get<double>(),
                                           c.at("reward_backend_id").get<std::string>()});
    }
    return set;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed scored set: ") + e.what());
  }
}

ScoredCandidateSet score_candidates(const CandidateSet& set, std::string_view instruction,
                                    Gateway& reward, std::size_t max_in_flight) {
  if (set.candidates.size() != set.k || set.k == 0) {
    throw Error(ErrorCode::kContract, "candidate set " + set.instruction_id + " is incomplete");
  }
  std::vector<std::optional<ScoredCandidate>> slots(set.candidates.size());
  parallel_for(set.candidates.size(), max_in_flight, [&](std::size_t i) {
    const auto& c = set.candidates[i];
    const auto score = reward.score_reward(instruction, c.text);
    slots[i] = ScoredCandidate{c.index, c.text, score.value, score.backend_id};
  });
  ScoredCandidateSet out;
  out.instruction_id = set.instruction_id;
  out.instruction = std::string(instruction);
  for (auto& s : slots) out.scored.push_back(std::move(*s));
  return out;
}

SftPair select_sft(const ScoredCandidateSet& scored) {
  if (scored.scored.empty()) {
    throw Error(ErrorCode::kContract, "cannot select from an empty set: " + scored.instruction_id);
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j < scored.scored.size(); ++j) {
    if (scored.scored[j].score > scored.scored[best].score) best = j;
  }
  const auto& c = scored.scored[best];
  return SftPair{scored.instruction_id, scored.instruction, c.text, c.index, c.score};
}

PreferenceOutcome select_preference(const ScoredCandidateSet& scored, double min_margin) {
  if (scored.scored.size() < 2) {
    throw Error(ErrorCode::kContract,
                "preference selection needs >= 2 candidates: " + scored.instruction_id);
  }
  if (!(min_margin >= 0)) throw Error(ErrorCode::kContract, "min_margin must be >= 0");
  const auto& s = scored.scored;
  std::size_t hi = 0;
  std::size_t lo = 0;
  for (std::size_t j = 1; j < s.size(); ++j) {
    if (s[j].score > s[hi].score) hi = j;
    if (s[j].score <= s[lo].score) lo = j;
  }
  const double margin = s[hi].score - s[lo].score;
  if (!(margin > 0)) return PreferenceSkip{scored.instruction_id, SkipReason::kDegenerate, 0.0};
  if (margin < min_margin) {
    return PreferenceSkip{scored.instruction_id, SkipReason::kBelowMargin, margin};
  }
  return PreferenceTriple{scored.instruction_id, scored.instruction, s[hi].text, s[lo].text,
                          s[hi].index, s[lo].index, margin};
}

Json export_datasets(const std::vector<SftPair>& pairs,
                     const std::vector<PreferenceTriple>& triples,
                     const std::filesystem::path& out_dir, const ExportSummary& summary,
                     bool force) {
  namespace fs = std::filesystem;
  const fs::path sft_path = out_dir / kSftFile;
  const fs::path dpo_path = out_dir / kDpoFile;
  const fs::path manifest_path = out_dir / kManifestFile;
  if (!force) {
    for (const auto& p : {sft_path, dpo_path, manifest_path}) {
      if (fs::exists(p)) {
        throw Error(ErrorCode::kRefusal, p.string() + " already exists (use --force)");
      }
    }
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<Json> sft_lines, dpo_lines;
  sft_lines.reserve(pairs.size());
  for (const auto& p : pairs) {
    sft_lines.push_back(Json{{"instruction", p.instruction}, {"response", p.response}});
  }
  dpo_lines.reserve(triples.size());
  for (const auto& t : triples) {
    if (!(t.margin > 0) || t.j_plus == t.j_minus) {
      throw Error(ErrorCode::kContract, "refusing to export zero-margin triple for " +
                                            t.instruction_id);
    }
    dpo_lines.push_back(
        Json{{"instruction", t.instruction}, {"chosen", t.chosen}, {"rejected", t.rejected}});
  }
  write_jsonl_atomic(sft_path, sft_lines);
  write_jsonl_atomic(dpo_path, dpo_lines);

  Json skips = Json::array();
  for (const auto& s : summary.skips) {
    skips.push_back(Json{{"instruction_id", s.instruction_id},
                         {"reason", skip_reason_name(s.reason)},
                         {"margin", s.margin}});
  }
  Json manifest;
  manifest["counts"] = Json{{"personas_in", summary.personas_in},
                            {"instructions_accepted", summary.instructions_accepted},
                            {"sft_pairs", pairs.size()},
                            {"dpo_triples", triples.size()},
                            {"skipped_degenerate", summary.skipped_degenerate},
                            {"skipped_margin", summary.skipped_margin}};
  manifest["run_seed"] = summary.run_seed;
  manifest["digests"] = summary.digests;
  manifest["skips"] = std::move(skips);
  for (const auto& [key, value] : summary.extra.items()) {
    if (key == "counts" && value.is_object()) {
      for (const auto& [ck, cv] : value.items()) manifest["counts"][ck] = cv;
    } else {
      manifest[key] = value;
    }
  }
  manifest["created_at"] = utc_timestamp();
  write_file_atomic(manifest_path, manifest.dump(2) + "\n");
  return manifest;
}

std::vector<SftPair> read_sft_file(const std::filesystem::path& path) {
  std::vector<SftPair> out;
  for_each_jsonl(read_file(path), [&](const Json& j, std::size_t line) {
    if (!j.is_object() || !j.contains("instruction") || !j.contains("response") ||
        !j["instruction"].is_string() || !j["response"].is_string()) {
      throw Error(ErrorCode::kParse, "SFT record needs string instruction and response", line);
    }
    SftPair p;
    p.instruction = j["instruction"].get<std::string>();
    p.response = j["response"].get<std::string>();
    out.push_back(std::move(p));
  });
  return out;
}

std::vector<PreferenceTriple> read_dpo_file(const std::filesystem::path& path) {
  std::vector<PreferenceTriple> out;
  for_each_jsonl(read_file(path), [&](const Json& j, std::size_t line) {
    for (const char* field : {"instruction", "chosen", "rejected"}) {
      if (!j.is_object() || !j.contains(field) || !j[field].is_string()) {
        throw Error(ErrorCode::kParse, std::string("DPO record needs string '") + field + "'",
                    line);
      }
    }
    PreferenceTriple t;
    t.instruction = j["instruction"].get<std::string>();
    t.chosen = j["chosen"].get<std::string>();
    t.rejected = j["rejected"].get<std::string>();
    out.push_back(std::move(t));
  });
  return out;
}

}  // namespace expertsynth
