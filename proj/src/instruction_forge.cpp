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


#include "expertsynth/instruction_forge.hpp"

#include <algorithm>

#include "expertsynth/dataset_auditor.hpp"
#include "expertsynth/error.hpp"
#include "expertsynth/fixtures.hpp"
#include "expertsynth/hashing.hpp"

namespace expertsynth {

std::string_view gate_reason_name(GateReason reason) {
  switch (reason) {
    case GateReason::kTooEasy: return "too_easy";
    case GateReason::kUnsafe: return "unsafe";
    case GateReason::kUninformative: return "uninformative";
    case GateReason::kMalformed: return "malformed";
    case GateReason::kDuplicate: return "duplicate";
  }
  return "unknown";
}

GateReason parse_gate_reason(std::string_view name) {
  for (auto r : {GateReason::kTooEasy, GateReason::kUnsafe, GateReason::kUninformative,
                 GateReason::kMalformed, GateReason::kDuplicate}) {
    if (gate_reason_name(r) == name) return r;
  }
  throw Error(ErrorCode::kParse, "unknown gate reason '" + std::string(name) + "'");
}

std::string_view gate_mode_name(GateMode mode) {
  return mode == GateMode::kHeuristic ? "heuristic" : "judge";
}

GateMode parse_gate_mode(std::string_view name) {
  if (name == "heuristic") return GateMode::kHeuristic;
  if (name == "judge") return GateMode::kJudge;
  throw Error(ErrorCode::kConfiguration, "unknown gate mode '" + std::string(name) + "'");
}

GateDecision GateDecision::from_reasons(std::vector<GateReason> reasons, GateMode mode) {
  GateDecision d;
  d.reasons = std::move(reasons);
  d.accepted = d.reasons.empty();
  d.gate_mode = mode;
  return d;
}

Json instruction_to_json(const InstructionRecord& r) {
  Json reasons = Json::array();
  for (auto reason : r.gate.reasons) reasons.push_back(gate_reason_name(reason));
  Json j;
  j["instruction_id"] = r.instruction_id;
  j["persona_id"] = r.persona_id;
  j["text"] = r.text;
  j["gate"] = Json{{"accepted", r.gate.accepted},
                   {"reasons", reasons},
                   {"gate_mode", gate_mode_name(r.gate.gate_mode)}};
  j["template_digest"] = r.template_digest;
  j["seed"] = r.seed;
  if (r.difficulty || r.feasibility) {
    Json scores = Json::object();
    if (r.difficulty) scores["difficulty"] = *r.difficulty;
    if (r.feasibility) scores["feasibility"] = *r.feasibility;
    j["judge_scores"] = scores;
  }
  return j;
}

InstructionRecord instruction_from_json(const Json& j) {
  try {
    InstructionRecord r;
    r.instruction_id = j.at("instruction_id").get<std::string>();
    r.persona_id = j.at("persona_id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    const auto& gate = j.at("gate");
    std::vector<GateReason> reasons;
    for (const auto& reason : gate.at("reasons")) {
      reasons.push_back(parse_gate_reason(reason.get<std::string>()));
    }
    r.gate = GateDecision::from_reasons(std::move(reasons),
                                        parse_gate_mode(gate.at("gate_mode").get<std::string>()));
    if (r.gate.accepted != gate.at("accepted").get<bool>()) {
      throw Error(ErrorCode::kParse, "gate.accepted disagrees with gate.reasons for " +
                                         r.instruction_id);
    }
    r.template_digest = j.at("template_digest").get<std::string>();
    r.seed = j.at("seed").get<std::int64_t>();
    if (j.contains("judge_scores")) {
      const auto& s = j["judge_scores"];
      if (s.contains("difficulty")) r.difficulty = s["difficulty"].get<int>();
      if (s.contains("feasibility")) r.feasibility = s["feasibility"].get<int>();
    }
    return r;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed instruction record: ") + e.what());
  }
}

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {
  const auto first = text_.find(kPersonaPlaceholder);
  if (first == std::string::npos ||
      text_.find(kPersonaPlaceholder, first + kPersonaPlaceholder.size()) != std::string::npos) {
    throw Error(ErrorCode::kConfiguration,
                "prompt template must contain exactly one {persona} placeholder");
  }
  digest_ = sha256_hex(text_);
}

PromptTemplate PromptTemplate::builtin_v1() {
  return PromptTemplate(std::string(fixtures::instruction_template_v1()));
}

std::string PromptTemplate::render(const Persona& persona) const {
  std::string out = text_;
  out.replace(out.find(kPersonaPlaceholder), kPersonaPlaceholder.size(), persona.text);
  return out;
}

std::string make_instruction_id(std::int64_t run_seed, std::string_view persona_id) {
  std::string material = "instruction\x1f" + std::to_string(run_seed) + '\x1f';
  material.append(persona_id);
  return "ins-" + sha256_hex(material).substr(0, 20);
}

InstructionRecord synthesize_instruction(const Persona& persona, const PromptTemplate& tmpl,
                                         const GenerationParams& params, Gateway& generator,
                                         std::int64_t run_seed) {
  InstructionRecord record;
  record.instruction_id = make_instruction_id(run_seed, persona.id);
  record.persona_id = persona.id;
  record.template_digest = tmpl.digest();
  record.seed = derive_seed(run_seed, persona.id, 0);
  record.gate = GateDecision{};

  GenerationRequest request;
  request.system_prompt = params.system_prompt;
  request.user_prompt = tmpl.render(persona);
  request.temperature = params.temperature;
  request.max_tokens = params.max_tokens;
  request.seed = record.seed;
  try {
    record.text = generator.generate_text(request).text;
  } catch (const Error& e) {
    throw Error(e.code(), "persona " + persona.id + ": " + e.what());
  }
  return record;
}

GateResult quality_gate(const InstructionRecord& record, GateMode mode,
                        const GateThresholds& thresholds, Gateway* judge) {
  if (mode == GateMode::kJudge && judge == nullptr) {
    throw Error(ErrorCode::kConfiguration, "judge gate mode requires a judge backend");
  }
  GateResult result;
  std::vector<GateReason> reasons;
  const auto body = trim(record.text);
  if (body.empty()) {
    reasons.push_back(GateReason::kMalformed);
    result.decision = GateDecision::from_reasons(std::move(reasons), mode);
    return result;
  }
  if (utf8_length(body) < thresholds.min_chars) reasons.push_back(GateReason::kUninformative);
  if (std::any_of(thresholds.blocklist.begin(), thresholds.blocklist.end(),
                  [&](const std::string& term) {
                    return !term.empty() && contains_case_insensitive(body, term);
                  })) {
    reasons.push_back(GateReason::kUnsafe);
  }

  if (mode == GateMode::kJudge) {
    const AuditRecord as_audit{record.instruction_id, record.text, std::nullopt};
    result.difficulty = judge_score(as_audit, JudgeMetric::kDifficulty, *judge).score;
    result.feasibility = judge_score(as_audit, JudgeMetric::kFeasibility, *judge).score;
    if (*result.difficulty < thresholds.min_difficulty) reasons.push_back(GateReason::kTooEasy);
    if (*result.feasibility < thresholds.min_feasibility &&
        std::find(reasons.begin(), reasons.end(), GateReason::kUninformative) == reasons.end()) {
      reasons.push_back(GateReason::kUninformative);
    }
  }
  result.decision = GateDecision::from_reasons(std::move(reasons), mode);
  return result;
}

std::vector<std::size_t> greedy_dedup_indices(const std::vector<EmbeddingVector>& embeddings,
                                              double min_distance) {
  if (!(min_distance >= 0)) throw Error(ErrorCode::kContract, "min_distance must be >= 0");
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    const bool near = std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return l2_distance(embeddings[i], embeddings[k]) < min_distance;
    });
    if (!near) kept.push_back(i);
  }
  return kept;
}

std::vector<InstructionRecord> dedup_instructions(const std::vector<InstructionRecord>& records,
                                                  Gateway& embedder, double min_distance) {
  if (!(min_distance >= 0)) throw Error(ErrorCode::kContract, "min_distance must be >= 0");
  for (const auto& r : records) {
    if (!r.gate.accepted) {
      throw Error(ErrorCode::kContract, "dedup input must be gate-accepted: " + r.instruction_id);
    }
  }
  if (min_distance == 0) return records;
  std::vector<EmbeddingVector> embeddings;
  embeddings.reserve(records.size());
  for (const auto& r : records) embeddings.push_back(embedder.embed_text(r.text));
  std::vector<InstructionRecord> out;
  for (auto i : greedy_dedup_indices(embeddings, min_distance)) out.push_back(records[i]);
  return out;
}

}  // namespace expertsynth
