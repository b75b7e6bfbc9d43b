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
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "expertsynth/candidate_sampler.hpp"
#include "expertsynth/gateway.hpp"
#include "expertsynth/jsonl.hpp"

namespace expertsynth {

struct ScoredCandidate {
  std::size_t index = 0;
  std::string text;
  double score = 0.0;
  std::string reward_backend_id;

  bool operator==(const ScoredCandidate&) const = default;
};

struct ScoredCandidateSet {
  std::string instruction_id;
  std::string instruction;
  std::vector<ScoredCandidate> scored;

  bool operator==(const ScoredCandidateSet&) const = default;
};

Json scored_set_to_json(const ScoredCandidateSet& set);
ScoredCandidateSet scored_set_from_json(const Json& j);

struct SftPair {
  std::string instruction_id;
  std::string instruction;
  std::string response;
  std::size_t chosen_index = 0;
  double chosen_score = 0.0;
};

struct PreferenceTriple {
  std::string instruction_id;
  std::string instruction;
  std::string chosen;
  std::string rejected;
  std::size_t j_plus = 0;
  std::size_t j_minus = 0;
  double margin = 0.0;
};

enum class SkipReason { kDegenerate, kBelowMargin };
std::string_view skip_reason_name(SkipReason reason);

struct PreferenceSkip {
  std::string instruction_id;
  SkipReason reason = SkipReason::kDegenerate;
  double margin = 0.0;
};

using PreferenceOutcome = std::variant<PreferenceTriple, PreferenceSkip>;

// One reward call per candidate, order preserved. Any failure throws and no
// partial set is produced.
ScoredCandidateSet score_candidates(const CandidateSet& set, std::string_view instruction,
                                    Gateway& reward, std::size_t max_in_flight = 1);

// Best-of-k: the highest score, ties to the lowest index. kContract if empty.
SftPair select_sft(const ScoredCandidateSet& scored);

// chosen = highest score (ties: lowest index), rejected = lowest score (ties:
// highest index). Skip(degenerate) when all scores are equal, Skip(below_margin)
// when 0 < margin < min_margin. kContract with fewer than two candidates or a
// negative min_margin.
PreferenceOutcome select_preference(const ScoredCandidateSet& scored, double min_margin = 0.0);

struct ExportSummary {
  std::size_t personas_in = 0;
  std::size_t instructions_accepted = 0;
  std::size_t skipped_degenerate = 0;
  std::size_t skipped_margin = 0;
  std::int64_t run_seed = 0;
  Json digests = Json::object();
  std::vector<PreferenceSkip> skips;
  // Merged into the manifest top level.
  Json extra = Json::object();
};

inline constexpr const char* kSftFile = "pika_sft.jsonl";
inline constexpr const char* kDpoFile = "pika_dpo.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";

// Writes pika_sft.jsonl ({instruction, response}), pika_dpo.jsonl
// ({instruction, chosen, rejected}) and manifest.json. Refuses (kRefusal) to
// overwrite any of them unless `force`. Returns the manifest.
Json export_datasets(const std::vector<SftPair>& pairs,
                     const std::vector<PreferenceTriple>& triples,
                     const std::filesystem::path& out_dir, const ExportSummary& summary,
                     bool force = false);

// Round-trip readers for the exported files. Only the exported fields are
// populated.
std::vector<SftPair> read_sft_file(const std::filesystem::path& path);
std::vector<PreferenceTriple> read_dpo_file(const std::filesystem::path& path);

}  // namespace expertsynth
