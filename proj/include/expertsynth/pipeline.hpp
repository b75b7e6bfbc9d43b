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

#include <optional>

#include "expertsynth/jsonl.hpp"
#include "expertsynth/run_config.hpp"

namespace expertsynth {

enum class PipelineStage { kPersonas, kInstructions, kCandidates, kScored };

struct RunOptions {
  // Stop cleanly once this stage is persisted (used to exercise resume).
  std::optional<PipelineStage> stop_after;
  // Wipe a previous run in out_dir instead of refusing.
  bool force = false;
};

inline constexpr const char* kLedgerFile = "ledger.jsonl";
inline constexpr const char* kInstructionsFile = "instructions.jsonl";
inline constexpr const char* kCandidatesFile = "candidates.jsonl";
inline constexpr const char* kScoredFile = "scored.jsonl";
inline constexpr const char* kPersonaManifestFile = "personas.manifest";
inline constexpr const char* kFailuresFile = "failures.json";
inline constexpr const char* kReportJsonFile = "report.json";
inline constexpr const char* kReportMdFile = "report.md";

// End-to-end driver: persona sampling, instruction synthesis and gating,
// dedup, candidate sampling, reward scoring, selection, export and an
// optional audit. Every completed unit of work is recorded in ledger.jsonl
// before the next stage begins, so an interrupted run resumes without
// repeating backend calls.
class Pipeline {
 public:
  Pipeline(RunConfig config, BackendSet backends);

  // Fresh run. kRefusal if out_dir already holds a run and !force;
  // kConfiguration/kIo if the persona source is missing (nothing is created);
  // kRunFailed if the failure fraction exceeds max_failure_fraction.
  Json run(const RunOptions& options = {});

  // Continues the run recorded in out_dir/ledger.jsonl. kRefusal when the
  // ledger was written under a different config digest.
  Json resume(const RunOptions& options = {});

  const RunConfig& config() const { return config_; }

 private:
  Json execute(bool resuming, const RunOptions& options);

  RunConfig config_;
  BackendSet backends_;
};

// Call counts a run would issue for the personas currently on disk; no
// network and no files. Counts for later stages are upper bounds.
Json plan_run(const RunConfig& config);

}  // namespace expertsynth
