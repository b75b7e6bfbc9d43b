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
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "expertsynth/alignment_selector.hpp"
#include "expertsynth/candidate_sampler.hpp"
#include "expertsynth/instruction_forge.hpp"
#include "expertsynth/jsonl.hpp"

namespace expertsynth {

// Per-instruction progress. Ordered: an instruction only ever moves forward.
enum class StageStatus {
  kPersonaConsumed = 0,
  kInstructionDone = 1,
  kCandidatesDone = 2,
  kScored = 3,
  kSelected = 4,
  kFailed = 5,
};

std::string_view stage_status_name(StageStatus status);

struct FailureRecord {
  std::string instruction_id;
  std::string persona_id;
  std::string stage;
  std::string reason;
};

// The fold of all ledger events.
struct LedgerState {
  std::string config_digest;
  std::vector<std::string> consumed_personas;  // in consumption order
  std::map<std::string, std::string> instruction_of_persona;
  std::map<std::string, StageStatus> status;  // keyed by instruction id
  std::map<std::string, InstructionRecord> instructions;
  std::map<std::string, CandidateSet> candidates;
  std::map<std::string, ScoredCandidateSet> scored;
  std::map<std::string, FailureRecord> failures;
  std::optional<std::set<std::string>> dedup_dropped;  // set once dedup ran

  // Applies one event; kConsistency if it would move a stage backwards or
  // re-consume a persona.
  void apply(const Json& event);
};

// Append-only JSONL event log with a single serialized writer. Every event
// is flushed before append() returns, and the in-memory fold is kept current.
class JobLedger {
 public:
  // Replays an existing file (a torn final line from a crash is ignored).
  explicit JobLedger(std::filesystem::path path);

  void append(const Json& event);
  LedgerState state() const;
  const std::filesystem::path& path() const { return path_; }

  static Json begin_event(std::string_view config_digest, std::int64_t run_seed);
  static Json persona_consumed_event(std::string_view persona_id,
                                     std::string_view instruction_id);
  static Json instruction_done_event(const InstructionRecord& record);
  static Json dedup_event(const std::vector<std::string>& dropped);
  static Json candidates_done_event(const CandidateSet& set);
  static Json scored_event(const ScoredCandidateSet& set);
  static Json selected_event(std::string_view instruction_id);
  static Json failed_event(const FailureRecord& failure);

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::ofstream out_;
  LedgerState state_;
};

}  // namespace expertsynth
