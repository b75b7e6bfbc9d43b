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


#include "expertsynth/pipeline.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>

#include "expertsynth/alignment_selector.hpp"
#include "expertsynth/candidate_sampler.hpp"
#include "expertsynth/dataset_auditor.hpp"
#include "expertsynth/error.hpp"
#include "expertsynth/hashing.hpp"
#include "expertsynth/instruction_forge.hpp"
#include "expertsynth/job_ledger.hpp"
#include "expertsynth/parallel.hpp"
#include "expertsynth/persona_store.hpp"

namespace expertsynth {
namespace fs = std::filesystem;
namespace {

const char* const kRunArtifacts[] = {
    kLedgerFile,  kInstructionsFile, kCandidatesFile, kScoredFile,   kPersonaManifestFile,
    kFailuresFile, kReportJsonFile,  kReportMdFile,   kSftFile,      kDpoFile,
    kManifestFile};

std::string_view pipeline_stage_name(PipelineStage stage) {
  switch (stage) {
    case PipelineStage::kPersonas: return "personas";
    case PipelineStage::kInstructions: return "instructions";
    case PipelineStage::kCandidates: return "candidates";
    case PipelineStage::kScored: return "scored";
  }
  return "unknown";
}

PersonaCollection load_source(const RunConfig& config) {
  if (!fs::exists(config.persona_source)) {
    throw Error(ErrorCode::kConfiguration,
                "persona source not found: " + config.persona_source.string());
  }
  return load_personas_file(config.persona_source);
}

class Run {
 public:
  Run(const RunConfig& config, BackendSet& backends, JobLedger& ledger)
      : config_(config), backends_(backends), ledger_(ledger) {}

  void fail(const std::string& id, const std::string& stage, const std::exception& e) {
    auto it = persona_of_instruction.find(id);
    const std::string persona = it == persona_of_instruction.end() ? "" : it->second;
    ledger_.append(JobLedger::failed_event({id, persona, stage, e.what()}));
  }

  void check_failure_budget(const std::vector<std::string>& order) {
    const auto s = ledger_.state();
    if (order.empty() || s.failures.empty()) return;
    const double fraction =
        static_cast<double>(s.failures.size()) / static_cast<double>(order.size());
    if (fraction <= config_.max_failure_fraction) return;
    Json report = Json::array();
    std::ostringstream msg;
    msg << s.failures.size() << " of " << order.size()
        << " instructions failed, above max_failure_fraction=" << config_.max_failure_fraction;
    for (const auto& id : order) {
      auto it = s.failures.find(id);
      if (it == s.failures.end()) continue;
      const auto& f = it->second;
      report.push_back(Json{{"instruction_id", f.instruction_id},
                            {"persona_id", f.persona_id},
                            {"stage", f.stage},
                            {"reason", f.reason}});
      msg << "\n  " << f.instruction_id << " [" << f.stage << "] " << f.reason;
    }
    write_file_atomic(config_.out_dir / kFailuresFile,
                      Json{{"failed", report}, {"attempted", order.size()}}.dump(2) + "\n");
    throw Error(ErrorCode::kRunFailed, msg.str());
  }

  std::vector<std::string> pending(const std::vector<std::string>& order, StageStatus at) {
    const auto s = ledger_.state();
    std::vector<std::string> out;
    for (const auto& id : order) {
      if (s.status.at(id) == at) out.push_back(id);
    }
    return out;
  }

  std::map<std::string, std::string> persona_of_instruction;

  const RunConfig& config_;
  BackendSet& backends_;
  JobLedger& ledger_;
};

std::vector<InstructionRecord> ordered_instructions(const LedgerState& s,
                                                    const std::vector<std::string>& order) {
  std::vector<InstructionRecord> out;
  for (const auto& id : order) {
    if (auto it = s.instructions.find(id); it != s.instructions.end()) out.push_back(it->second);
  }
  return out;
}

}  // namespace

Pipeline::Pipeline(RunConfig config, BackendSet backends)
    : config_(std::move(config)), backends_(std::move(backends)) {}

Json Pipeline::run(const RunOptions& options) { return execute(false, options); }
Json Pipeline::resume(const RunOptions& options) { return execute(true, options); }

Json Pipeline::execute(bool resuming, const RunOptions& options) {
  config_.validate();
  const PersonaCollection source = load_source(config_);
  const PromptTemplate tmpl = config_.prompt_template();
  const std::string digest = config_.digest(source.source_digest);
  const fs::path out = config_.out_dir;
  const fs::path ledger_path = out / kLedgerFile;

  if (resuming) {
    if (!fs::exists(ledger_path)) {
      throw Error(ErrorCode::kRefusal, "no ledger to resume at " + ledger_path.string());
    }
  } else {
    const bool occupied = std::any_of(std::begin(kRunArtifacts), std::end(kRunArtifacts),
                                      [&](const char* f) { return fs::exists(out / f); });
    if (occupied && !options.force) {
      throw Error(ErrorCode::kRefusal,
                  out.string() + " already holds a run; use resume or --force");
    }
    for (const char* f : kRunArtifacts) fs::remove(out / f);
  }
  config_.check_credentials();
  fs::create_directories(out);

  JobLedger ledger(ledger_path);
  {
    const auto s = ledger.state();
    if (resuming) {
      if (s.config_digest != digest) {
        throw Error(ErrorCode::kRefusal,
                    "ledger was written under config digest " + s.config_digest +
                        " but the current config digests to " + digest +
                        "; output-affecting settings (seed, k, temperature, thresholds, "
                        "backends, persona file, template) must not change across resume");
      }
    } else {
      ledger.append(JobLedger::begin_event(digest, config_.run_seed));
    }
  }
  Run run(config_, backends_, ledger);

  // -- personas ------------------------------------------------------------
  const PersonaCollection filtered = filter_personas(source, config_.filter);
  std::map<std::string, const Persona*> by_id;
  for (const auto& p : filtered.personas) by_id[p.id] = &p;
  if (ledger.state().consumed_personas.empty()) {
    const std::size_t n = config_.num_personas == 0 ? filtered.size() : config_.num_personas;
    const auto sample = sample_personas(filtered, n, static_cast<std::uint64_t>(config_.run_seed));
    for (const auto& p : sample.personas) {
      ledger.append(JobLedger::persona_consumed_event(
          p.id, make_instruction_id(config_.run_seed, p.id)));
    }
  }
  std::vector<std::string> order;  // instruction ids in consumption order
  std::vector<const Persona*> persona_of;
  {
    const auto s = ledger.state();
    for (const auto& pid : s.consumed_personas) {
      auto it = by_id.find(pid);
      if (it == by_id.end()) {
        throw Error(ErrorCode::kConsistency, "ledger persona " + pid + " is not in the source");
      }
      order.push_back(s.instruction_of_persona.at(pid));
      persona_of.push_back(it->second);
      run.persona_of_instruction[order.back()] = pid;
    }
  }
  {
    std::string ids;
    for (const auto* p : persona_of) ids += p->id + "\n";
    Json manifest{{"source_digest", source.source_digest},
                  {"personas_loaded", source.size()},
                  {"personas_after_filter", filtered.size()},
                  {"personas_consumed", order.size()},
                  {"consumed_digest", sha256_hex(ids)}};
    write_file_atomic(out / kPersonaManifestFile, manifest.dump(2) + "\n");
  }
  auto partial = [&](PipelineStage stage) {
    const auto s = ledger.state();
    return Json{{"completed", false},
                {"stopped_after", pipeline_stage_name(stage)},
                {"config_digest", digest},
                {"personas_consumed", order.size()},
                {"failed", s.failures.size()}};
  };
  if (options.stop_after == PipelineStage::kPersonas) return partial(PipelineStage::kPersonas);

  // -- step 1: instructions and gate ----------------------------------------
  {
    std::vector<std::size_t> todo;
    const auto s = ledger.state();
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (s.status.at(order[i]) == StageStatus::kPersonaConsumed) todo.push_back(i);
    }
    Gateway* judge = config_.gate_mode == GateMode::kJudge ? backends_.judge.get() : nullptr;
    parallel_for(todo.size(), config_.max_in_flight, [&](std::size_t t) {
      const auto i = todo[t];
      try {
        auto record = synthesize_instruction(*persona_of[i], tmpl, config_.instruction_params,
                                             *backends_.generation, config_.run_seed);
        const auto gate = quality_gate(record, config_.gate_mode, config_.gate, judge);
        record.gate = gate.decision;
        record.difficulty = gate.difficulty;
        record.feasibility = gate.feasibility;
        ledger.append(JobLedger::instruction_done_event(record));
      } catch (const Error& e) {
        run.fail(order[i], "instruction", e);
      }
    });
    run.check_failure_budget(order);
  }

  // -- dedup over the accepted set -------------------------------------------
  if (!ledger.state().dedup_dropped) {
    const auto s = ledger.state();
    std::vector<std::string> accepted;
    for (const auto& id : order) {
      if (s.status.at(id) == StageStatus::kInstructionDone && s.instructions.at(id).gate.accepted) {
        accepted.push_back(id);
      }
    }
    std::vector<std::string> dropped;
    if (config_.dedup_min_distance > 0 && accepted.size() >= 2) {
      std::vector<std::optional<EmbeddingVector>> embeddings(accepted.size());
      parallel_for(accepted.size(), config_.max_in_flight, [&](std::size_t i) {
        try {
          embeddings[i] = backends_.embedding->embed_text(s.instructions.at(accepted[i]).text);
        } catch (const Error& e) {
          run.fail(accepted[i], "dedup", e);
        }
      });
      std::vector<EmbeddingVector> present;
      std::vector<std::string> present_ids;
      for (std::size_t i = 0; i < accepted.size(); ++i) {
        if (embeddings[i]) {
          present.push_back(std::move(*embeddings[i]));
          present_ids.push_back(accepted[i]);
        }
      }
      const auto kept = greedy_dedup_indices(present, config_.dedup_min_distance);
      std::vector<bool> keep(present.size(), false);
      for (auto k : kept) keep[k] = true;
      for (std::size_t i = 0; i < present.size(); ++i) {
        if (!keep[i]) dropped.push_back(present_ids[i]);
      }
    }
    ledger.append(JobLedger::dedup_event(dropped));
    run.check_failure_budget(order);
  }
  write_jsonl_atomic(out / kInstructionsFile, [&] {
    std::vector<Json> lines;
    for (const auto& r : ordered_instructions(ledger.state(), order)) {
      lines.push_back(instruction_to_json(r));
    }
    return lines;
  }());
  if (options.stop_after == PipelineStage::kInstructions) {
    return partial(PipelineStage::kInstructions);
  }

  // -- step 2: candidates ------------------------------------------------------
  {
    const auto s = ledger.state();
    std::vector<std::string> todo;
    for (const auto& id : run.pending(order, StageStatus::kInstructionDone)) {
      if (s.instructions.at(id).gate.accepted) todo.push_back(id);
    }
    SamplingParams params;
    params.k = config_.k;
    params.temperature = config_.temperature;
    params.allow_hot_sampling = config_.allow_hot_sampling;
    params.system_prompt = config_.response_system_prompt;
    params.max_tokens = config_.response_max_tokens;
    parallel_for(todo.size(), config_.max_in_flight, [&](std::size_t t) {
      try {
        const auto set = sample_candidates(s.instructions.at(todo[t]), params,
                                           *backends_.generation, config_.run_seed);
        ledger.append(JobLedger::candidates_done_event(set));
      } catch (const Error& e) {
        run.fail(todo[t], "candidates", e);
      }
    });
    run.check_failure_budget(order);
  }
  write_jsonl_atomic(out / kCandidatesFile, [&] {
    const auto s = ledger.state();
    std::vector<Json> lines;
    for (const auto& id : order) {
      if (auto it = s.candidates.find(id); it != s.candidates.end()) {
        lines.push_back(candidate_set_to_json(it->second));
      }
    }
    return lines;
  }());
  if (options.stop_after == PipelineStage::kCandidates) {
    return partial(PipelineStage::kCandidates);
  }

  // -- step 3: reward scoring ---------------------------------------------------
  {
    const auto s = ledger.state();
    const auto todo = run.pending(order, StageStatus::kCandidatesDone);
    parallel_for(todo.size(), config_.max_in_flight, [&](std::size_t t) {
      try {
        const auto scored = score_candidates(s.candidates.at(todo[t]),
                                             s.instructions.at(todo[t]).text, *backends_.reward);
        ledger.append(JobLedger::scored_event(scored));
      } catch (const Error& e) {
        run.fail(todo[t], "scoring", e);
      }
    });
    run.check_failure_budget(order);
  }
  write_jsonl_atomic(out / kScoredFile, [&] {
    const auto s = ledger.state();
    std::vector<Json> lines;
    for (const auto& id : order) {
      if (auto it = s.scored.find(id); it != s.scored.end()) {
        lines.push_back(scored_set_to_json(it->second));
      }
    }
    return lines;
  }());
  if (options.stop_after == PipelineStage::kScored) return partial(PipelineStage::kScored);

  // -- selection and export ------------------------------------------------------
  std::vector<SftPair> pairs;
  std::vector<PreferenceTriple> triples;
  ExportSummary summary;
  {
    const auto s = ledger.state();
    for (const auto& id : order) {
      auto it = s.scored.find(id);
      if (it == s.scored.end() || s.status.at(id) == StageStatus::kFailed) continue;
      pairs.push_back(select_sft(it->second));
      if (config_.emit_dpo) {
        auto outcome = select_preference(it->second, config_.min_margin);
        if (auto* triple = std::get_if<PreferenceTriple>(&outcome)) {
          triples.push_back(std::move(*triple));
        } else {
          const auto& skip = std::get<PreferenceSkip>(outcome);
          ++(skip.reason == SkipReason::kDegenerate ? summary.skipped_degenerate
                                                    : summary.skipped_margin);
          summary.skips.push_back(skip);
        }
      }
      if (s.status.at(id) == StageStatus::kScored) {
        ledger.append(JobLedger::selected_event(id));
      }
    }
  }
  const auto final_state = ledger.state();
  std::size_t rejected = 0;
  std::size_t duplicates = 0;
  for (const auto& id : order) {
    if (final_state.status.at(id) == StageStatus::kFailed) continue;
    auto it = final_state.instructions.find(id);
    if (it != final_state.instructions.end() && !it->second.gate.accepted) {
      ++rejected;
      if (final_state.dedup_dropped && final_state.dedup_dropped->contains(id)) ++duplicates;
    }
  }
  summary.personas_in = order.size();
  summary.instructions_accepted = pairs.size();
  summary.run_seed = config_.run_seed;
  summary.digests = Json{{"config", digest},
                         {"template", tmpl.digest()},
                         {"persona_source", source.source_digest}};
  Json failed = Json::array();
  for (const auto& id : order) {
    if (auto it = final_state.failures.find(id); it != final_state.failures.end()) {
      failed.push_back(Json{{"instruction_id", id},
                            {"stage", it->second.stage},
                            {"reason", it->second.reason}});
    }
  }
  summary.extra = Json{
      {"counts",
       Json{{"personas_loaded", source.size()},
            {"personas_after_filter", filtered.size()},
            {"instructions_attempted", order.size()},
            {"instructions_rejected", rejected},
            {"instructions_deduplicated", duplicates},
            {"instructions_failed", final_state.failures.size()}}},
      {"completed", true},
      {"k", config_.k},
      {"temperature", config_.temperature},
      {"min_margin", config_.min_margin},
      {"gate_mode", gate_mode_name(config_.gate_mode)},
      {"failed", failed}};
  Json manifest = export_datasets(pairs, triples, out, summary, /*force=*/true);

  if (config_.audit && pairs.size() >= 2) {
    std::vector<AuditRecord> records;
    for (const auto& p : pairs) records.push_back({p.instruction_id, p.instruction, p.response});
    const auto mnd = min_neighbor_distances(records, *backends_.embedding, "run",
                                            MndOptions{}, config_.max_in_flight);
    WhitespaceTokenCounter counter;
    const auto lengths = length_stats(records, counter, "run");
    const auto report = build_report("run", mnd, lengths, {});
    write_file_atomic(out / kReportJsonFile, report_to_json(report).dump(2) + "\n");
    write_file_atomic(out / kReportMdFile, render_markdown(report));
  }
  return manifest;
}

Json plan_run(const RunConfig& config) {
  config.validate();
  const auto source = load_source(config);
  const auto filtered = filter_personas(source, config.filter);
  const std::size_t n = config.num_personas == 0 ? filtered.size() : config.num_personas;
  if (n > filtered.size()) {
    throw Error(ErrorCode::kCapacity, "num_personas=" + std::to_string(n) + " but only " +
                                          std::to_string(filtered.size()) +
                                          " personas survive the filter");
  }
  const bool judge = config.gate_mode == GateMode::kJudge;
  return Json{{"personas_loaded", source.size()},
              {"personas_after_filter", filtered.size()},
              {"personas_to_consume", n},
              {"calls",
               Json{{"generation_instructions", n},
                    {"judge_gate", judge ? 2 * n : 0},
                    {"embedding_dedup_max", config.dedup_min_distance > 0 ? n : 0},
                    {"generation_candidates_max", n * config.k},
                    {"reward_max", n * config.k},
                    {"embedding_audit_max", config.audit ? n : 0}}},
              {"k", config.k},
              {"temperature", config.temperature}};
}

}  // namespace expertsynth
