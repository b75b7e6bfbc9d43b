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


#include "expertsynth/job_ledger.hpp"

#include "expertsynth/error.hpp"

namespace expertsynth {
namespace {

void advance(LedgerState& s, const std::string& id, StageStatus next) {
  auto it = s.status.find(id);
  if (it == s.status.end()) {
    throw Error(ErrorCode::kConsistency, "ledger event for unknown instruction " + id);
  }
  if (it->second == StageStatus::kFailed ||
      static_cast<int>(next) <= static_cast<int>(it->second)) {
    throw Error(ErrorCode::kConsistency,
                "ledger would move " + id + " from " +
                    std::string(stage_status_name(it->second)) + " to " +
                    std::string(stage_status_name(next)));
  }
  it->second = next;
}

}  // namespace

std::string_view stage_status_name(StageStatus status) {
  switch (status) {
    case StageStatus::kPersonaConsumed: return "persona_consumed";
    case StageStatus::kInstructionDone: return "instruction_done";
    case StageStatus::kCandidatesDone: return "candidates_done";
    case StageStatus::kScored: return "scored";
    case StageStatus::kSelected: return "selected";
    case StageStatus::kFailed: return "failed";
  }
  return "unknown";
}

void LedgerState::apply(const Json& event) {
  const auto type = event.at("event").get<std::string>();
  if (type == "begin") {
    if (!config_digest.empty()) throw Error(ErrorCode::kConsistency, "ledger begins twice");
    config_digest = event.at("config_digest").get<std::string>();
  } else if (type == "persona_consumed") {
    const auto persona = event.at("persona_id").get<std::string>();
    const auto id = event.at("instruction_id").get<std::string>();
    if (instruction_of_persona.contains(persona) || status.contains(id)) {
      throw Error(ErrorCode::kConsistency, "persona " + persona + " consumed twice");
    }
    consumed_personas.push_back(persona);
    instruction_of_persona[persona] = id;
    status[id] = StageStatus::kPersonaConsumed;
  } else if (type == "instruction_done") {
    auto record = instruction_from_json(event.at("record"));
    advance(*this, record.instruction_id, StageStatus::kInstructionDone);
    instructions[record.instruction_id] = std::move(record);
  } else if (type == "dedup_complete") {
    if (dedup_dropped) throw Error(ErrorCode::kConsistency, "dedup recorded twice");
    std::set<std::string> dropped;
    for (const auto& id : event.at("dropped")) {
      const auto s = id.get<std::string>();
      auto it = instructions.find(s);
      if (it == instructions.end()) {
        throw Error(ErrorCode::kConsistency, "dedup dropped unknown instruction " + s);
      }
      it->second.gate = GateDecision::from_reasons({GateReason::kDuplicate},
                                                   it->second.gate.gate_mode);
      dropped.insert(s);
    }
    dedup_dropped = std::move(dropped);
  } else if (type == "candidates_done") {
    auto set = candidate_set_from_json(event.at("set"));
    advance(*this, set.instruction_id, StageStatus::kCandidatesDone);
    candidates[set.instruction_id] = std::move(set);
  } else if (type == "scored") {
    auto set = scored_set_from_json(event.at("set"));
    advance(*this, set.instruction_id, StageStatus::kScored);
    scored[set.instruction_id] = std::move(set);
  } else if (type == "selected") {
    advance(*this, event.at("instruction_id").get<std::string>(), StageStatus::kSelected);
  } else if (type == "failed") {
    FailureRecord f{event.at("instruction_id").get<std::string>(),
                    event.value("persona_id", std::string()), event.at("stage").get<std::string>(),
                    event.at("reason").get<std::string>()};
    advance(*this, f.instruction_id, StageStatus::kFailed);
    failures[f.instruction_id] = std::move(f);
  } else {
    throw Error(ErrorCode::kConsistency, "unknown ledger event '" + type + "'");
  }
}

JobLedger::JobLedger(std::filesystem::path path) : path_(std::move(path)) {
  bool needs_newline = false;
  if (std::filesystem::exists(path_)) {
    const auto content = read_file(path_);
    std::size_t pos = 0;
    std::size_t line_no = 0;
    std::size_t valid_end = 0;
    while (pos < content.size()) {
      auto end = content.find('\n', pos);
      const bool complete = end != std::string::npos;
      if (!complete) end = content.size();
      const auto line = std::string_view(content).substr(pos, end - pos);
      ++line_no;
      pos = end + 1;
      if (line.empty()) {
        valid_end = std::min(pos, content.size());
        continue;
      }
      Json event;
      try {
        event = Json::parse(line);
      } catch (const Json::parse_error&) {
        if (!complete) break;  // torn tail from an interrupted append
        throw Error(ErrorCode::kParse, "corrupt ledger " + path_.string(), line_no);
      }
      try {
        state_.apply(event);
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::kParse, std::string("bad ledger event: ") + e.what(), line_no);
      }
      valid_end = complete ? pos : content.size();
    }
    if (valid_end < content.size()) std::filesystem::resize_file(path_, valid_end);
    needs_newline = valid_end > 0 && content[valid_end - 1] != '\n';
  }
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw Error(ErrorCode::kIo, "cannot open ledger " + path_.string());
  if (needs_newline) out_ << '\n' << std::flush;
}

void JobLedger::append(const Json& event) {
  std::lock_guard<std::mutex> lock(mu_);
  state_.apply(event);
  out_ << dump_line(event) << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::kIo, "ledger write failed: " + path_.string());
}

LedgerState JobLedger::state() const {
  std::lock_guard<std::mutex> lock(mu_);
  return state_;
}

Json JobLedger::begin_event(std::string_view config_digest, std::int64_t run_seed) {
  return Json{{"event", "begin"},
              {"config_digest", std::string(config_digest)},
              {"run_seed", run_seed}};
}

Json JobLedger::persona_consumed_event(std::string_view persona_id,
                                       std::string_view instruction_id) {
  return Json{{"event", "persona_consumed"},
              {"persona_id", std::string(persona_id)},
              {"instruction_id", std::string(instruction_id)}};
}

Json JobLedger::instruction_done_event(const InstructionRecord& record) {
  return Json{{"event", "instruction_done"}, {"record", instruction_to_json(record)}};
}

Json JobLedger::dedup_event(const std::vector<std::string>& dropped) {
  return Json{{"event", "dedup_complete"}, {"dropped", dropped}};
}

Json JobLedger::candidates_done_event(const CandidateSet& set) {
  return Json{{"event", "candidates_done"}, {"set", candidate_set_to_json(set)}};
}

Json JobLedger::scored_event(const ScoredCandidateSet& set) {
  return Json{{"event", "scored"}, {"set", scored_set_to_json(set)}};
}

Json JobLedger::selected_event(std::string_view instruction_id) {
  return Json{{"event", "selected"}, {"instruction_id", std::string(instruction_id)}};
}

Json JobLedger::failed_event(const FailureRecord& f) {
  return Json{{"event", "failed"},
              {"instruction_id", f.instruction_id},
              {"persona_id", f.persona_id},
              {"stage", f.stage},
              {"reason", f.reason}};
}

}  // namespace expertsynth
