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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "expertsynth/backend.hpp"
#include "expertsynth/gateway.hpp"
#include "expertsynth/jsonl.hpp"
#include "expertsynth/persona_store.hpp"

namespace expertsynth {

enum class GateReason { kTooEasy, kUnsafe, kUninformative, kMalformed, kDuplicate };
enum class GateMode { kHeuristic, kJudge };

std::string_view gate_reason_name(GateReason reason);
GateReason parse_gate_reason(std::string_view name);
std::string_view gate_mode_name(GateMode mode);
GateMode parse_gate_mode(std::string_view name);

// accepted <=> reasons.empty()
struct GateDecision {
  bool accepted = false;
  std::vector<GateReason> reasons;
  GateMode gate_mode = GateMode::kJudge;

  static GateDecision from_reasons(std::vector<GateReason> reasons, GateMode mode);
  bool operator==(const GateDecision&) const = default;
};

struct InstructionRecord {
  std::string instruction_id;
  std::string persona_id;
  std::string text;
  GateDecision gate;
  std::string template_digest;
  std::int64_t seed = 0;
  // Judge scores behind a judge-mode decision (absent in heuristic mode).
  std::optional<int> difficulty;
  std::optional<int> feasibility;

  bool operator==(const InstructionRecord&) const = default;
};

Json instruction_to_json(const InstructionRecord& record);
InstructionRecord instruction_from_json(const Json& j);

inline constexpr std::string_view kPersonaPlaceholder = "{persona}";

// A template with exactly one persona placeholder. The digest identifies
// the template in output manifests.
class PromptTemplate {
 public:
  // kConfiguration unless the placeholder occurs exactly once.
  explicit PromptTemplate(std::string text);
  static PromptTemplate builtin_v1();

  std::string render(const Persona& persona) const;
  const std::string& text() const { return text_; }
  const std::string& digest() const { return digest_; }

 private:
  std::string text_;
  std::string digest_;
};

struct GenerationParams {
  std::string system_prompt;
  double temperature = 0.7;
  int max_tokens = 2048;
};

std::string make_instruction_id(std::int64_t run_seed, std::string_view persona_id);

// One generation call. The returned record is ungated (gate.accepted=false,
// no reasons). Gateway errors are rethrown with the persona id prepended.
InstructionRecord synthesize_instruction(const Persona& persona, const PromptTemplate& tmpl,
                                         const GenerationParams& params, Gateway& generator,
                                         std::int64_t run_seed);

struct GateThresholds {
  int min_difficulty = 6;
  int min_feasibility = 6;
  std::size_t min_chars = 40;
  std::vector<std::string> blocklist;
};

struct GateResult {
  GateDecision decision;
  std::optional<int> difficulty;
  std::optional<int> feasibility;
};

// Heuristic mode applies only offline rules (empty -> malformed, short ->
// uninformative, blocklisted -> unsafe). Judge mode applies the same rules
// and then requires difficulty >= min_difficulty (else too_easy) and
// feasibility >= min_feasibility (else uninformative). Judge mode with no
// judge -> kConfiguration; an unusable judge reply -> kScoring.
GateResult quality_gate(const InstructionRecord& record, GateMode mode,
                        const GateThresholds& thresholds, Gateway* judge = nullptr);

// Greedy scan in input order; a record is dropped when its embedding lies
// closer than min_distance to any record already kept.
std::vector<InstructionRecord> dedup_instructions(const std::vector<InstructionRecord>& records,
                                                  Gateway& embedder, double min_distance);

// Same scan over precomputed embeddings; returns the kept indices.
std::vector<std::size_t> greedy_dedup_indices(const std::vector<EmbeddingVector>& embeddings,
                                              double min_distance);

}  // namespace expertsynth
