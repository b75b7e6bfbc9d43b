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


#include "expertsynth/cli.hpp"

#include <CLI11.hpp>

#include <optional>
#include <set>

#include "expertsynth/alignment_selector.hpp"
#include "expertsynth/candidate_sampler.hpp"
#include "expertsynth/dataset_auditor.hpp"
#include "expertsynth/error.hpp"
#include "expertsynth/hashing.hpp"
#include "expertsynth/instruction_forge.hpp"
#include "expertsynth/job_ledger.hpp"
#include "expertsynth/parallel.hpp"
#include "expertsynth/persona_store.hpp"
#include "expertsynth/pipeline.hpp"

namespace expertsynth {
namespace fs = std::filesystem;
namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::int64_t> seed;
  std::string out;
  bool dry_run = false;
  bool force = false;
};

void ensure_writable(const std::vector<fs::path>& paths, bool force) {
  if (force) return;
  for (const auto& p : paths) {
    if (fs::exists(p)) throw Error(ErrorCode::kRefusal, p.string() + " exists (use --force)");
  }
}

void prepare_out(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

std::vector<std::string> split_csv(const std::vector<std::string>& values) {
  std::vector<std::string> out;
  for (const auto& v : values) {
    std::size_t pos = 0;
    while (pos <= v.size()) {
      auto end = v.find(',', pos);
      if (end == std::string::npos) end = v.size();
      if (end > pos) out.push_back(v.substr(pos, end - pos));
      pos = end + 1;
    }
  }
  return out;
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kConflict:
    case ErrorCode::kCapacity:
    case ErrorCode::kConfiguration:
    case ErrorCode::kConstraint:
    case ErrorCode::kContract:
    case ErrorCode::kRefusal:
      return kExitUserError;
    default:
      return kExitRuntimeFailure;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            const TransportFactory* factory) {
  CLI::App app{"expertsynth: persona-driven alignment data synthesis and dataset audits"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags g;
  app.add_option("--config", g.config, "Run configuration (JSON)");
  app.add_option("--seed", g.seed, "Override run_seed");
  app.add_option("--out", g.out, "Output directory (overrides out_dir)");
  app.add_flag("--dry-run", g.dry_run, "Print planned backend calls; write nothing");
  app.add_flag("--force", g.force, "Overwrite existing outputs");

  // personas filter | sample
  auto* personas = app.add_subcommand("personas", "Persona corpus utilities");
  personas->require_subcommand(1);
  personas->fallthrough();
  std::string persona_input;
  std::optional<std::size_t> min_length;
  std::vector<std::string> blocklist;
  bool require_domain = false;
  auto* p_filter = personas->add_subcommand("filter", "Apply the persona filter policy");
  p_filter->fallthrough();
  p_filter->add_option("--input", persona_input, "Persona JSONL")->required();
  p_filter->add_option("--min-length", min_length, "Minimum persona length (characters)");
  p_filter->add_option("--blocklist", blocklist, "Comma-separated blocked substrings");
  p_filter->add_flag("--require-domain", require_domain, "Drop personas without a domain tag");
  std::size_t sample_n = 0;
  std::string consumed_path;
  auto* p_sample = personas->add_subcommand("sample", "Sample personas without replacement");
  p_sample->fallthrough();
  p_sample->add_option("--input", persona_input, "Persona JSONL")->required();
  p_sample->add_option("--n", sample_n, "Number of personas")->required();
  p_sample->add_option("--consumed", consumed_path,
                       "ledger.jsonl or newline-separated ids that must not be drawn again");

  // synth instructions | candidates
  auto* synth = app.add_subcommand("synth", "Synthesis steps");
  synth->require_subcommand(1);
  synth->fallthrough();
  std::string personas_path, gate_mode_flag;
  std::optional<double> dedup_flag;
  auto* s_instr = synth->add_subcommand("instructions", "Persona -> gated instruction");
  s_instr->fallthrough();
  s_instr->add_option("--personas", personas_path, "Persona JSONL")->required();
  s_instr->add_option("--gate", gate_mode_flag, "heuristic | judge");
  s_instr->add_option("--dedup", dedup_flag, "Embedding distance below which to drop");
  std::string instructions_path;
  std::optional<std::size_t> k_flag;
  std::optional<double> temperature_flag;
  bool allow_hot = false;
  auto* s_cand = synth->add_subcommand("candidates", "Instruction -> k candidate responses");
  s_cand->fallthrough();
  s_cand->add_option("--instructions", instructions_path, "instructions.jsonl")->required();
  s_cand->add_option("--k", k_flag, "Candidates per instruction");
  s_cand->add_option("--temperature", temperature_flag, "Sampling temperature (< 1)");
  s_cand->add_flag("--allow-hot-sampling", allow_hot, "Permit temperature >= 1");

  // select
  std::string candidates_path;
  auto* select = app.add_subcommand("select", "Reward-score candidates");
  select->fallthrough();
  select->add_option("--instructions", instructions_path, "instructions.jsonl")->required();
  select->add_option("--candidates", candidates_path, "candidates.jsonl")->required();

  // export
  std::string scored_path;
  std::optional<double> min_margin_flag;
  bool no_dpo = false;
  auto* exp = app.add_subcommand("export", "Best-of-k SFT pairs and DPO triples");
  exp->fallthrough();
  exp->add_option("--scored", scored_path, "scored.jsonl")->required();
  exp->add_option("--min-margin", min_margin_flag, "Minimum chosen/rejected score gap");
  exp->add_flag("--no-dpo", no_dpo, "Only write SFT pairs");

  // audit
  std::string dataset_path, baseline_path, dataset_id, field_map_path, tokenizer_endpoint,
      tokenizer_model = "tokenizer";
  std::vector<std::string> judge_metrics;
  bool approximate = false;
  auto* audit = app.add_subcommand("audit", "Diversity, length and judge-score audit");
  audit->fallthrough();
  audit->add_option("--dataset", dataset_path, "JSONL with instruction/response")->required();
  audit->add_option("--baseline", baseline_path, "Earlier report.json to compare against");
  audit->add_option("--dataset-id", dataset_id, "Name recorded in the report");
  audit->add_option("--field-map", field_map_path, "JSON {id, instruction, response} paths");
  audit->add_option("--judge", judge_metrics, "Comma-separated: difficulty,feasibility,quality");
  audit->add_option("--tokenizer-endpoint", tokenizer_endpoint, "Remote token counter URL");
  audit->add_option("--tokenizer-model", tokenizer_model, "Model name for the token counter");
  audit->add_flag("--approximate-mnd", approximate, "Approximate MND (not exact)");

  auto* run = app.add_subcommand("run", "End-to-end pipeline");
  run->fallthrough();
  auto* resume = app.add_subcommand("resume", "Continue an interrupted run");
  resume->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUserError;
  }

  try {
    RunConfig cfg = g.config.empty() ? RunConfig{} : RunConfig::load(g.config);
    if (g.seed) cfg.run_seed = *g.seed;
    if (!g.out.empty()) cfg.out_dir = g.out;
    const fs::path out_dir = cfg.out_dir;
    const TransportFactory transports =
        factory != nullptr ? *factory : default_transport_factory(cfg.mock);
    auto backends = [&] { return make_backends(cfg.backends, cfg.max_in_flight, transports); };

    if (p_filter->parsed() || p_sample->parsed()) {
      auto collection = load_personas_file(persona_input);
      PersonaCollection result;
      if (p_filter->parsed()) {
        PersonaFilterPolicy policy = cfg.filter;
        if (min_length) policy.min_text_length = *min_length;
        if (!blocklist.empty()) policy.blocklist = split_csv(blocklist);
        if (require_domain) policy.require_domain = true;
        result = filter_personas(collection, policy);
      } else {
        std::set<std::string> consumed;
        if (!consumed_path.empty()) {
          if (fs::path(consumed_path).filename() == kLedgerFile) {
            const auto s = JobLedger(consumed_path).state();
            consumed.insert(s.consumed_personas.begin(), s.consumed_personas.end());
          } else {
            std::istringstream lines(read_file(consumed_path));
            for (std::string line; std::getline(lines, line);) {
              if (!trim(line).empty()) consumed.insert(std::string(trim(line)));
            }
          }
        }
        result = sample_personas(collection, sample_n, static_cast<std::uint64_t>(cfg.run_seed),
                                 consumed);
      }
      out << result.size() << " of " << collection.size() << " personas\n";
      if (g.dry_run) return kExitOk;
      const auto personas_file = out_dir / "personas.jsonl";
      ensure_writable({personas_file, out_dir / kPersonaManifestFile}, g.force);
      prepare_out(out_dir);
      const auto content = personas_to_jsonl(result);
      write_file_atomic(personas_file, content);
      write_file_atomic(out_dir / kPersonaManifestFile,
                        persona_manifest(result, sha256_hex(content)).dump(2) + "\n");
      return kExitOk;
    }

    if (s_instr->parsed()) {
      const auto collection = load_personas_file(personas_path);
      const GateMode mode = gate_mode_flag.empty() ? cfg.gate_mode : parse_gate_mode(gate_mode_flag);
      const double dedup = dedup_flag.value_or(cfg.dedup_min_distance);
      if (g.dry_run) {
        const auto n = collection.size();
        out << dump_line(Json{{"generation", n},
                              {"judge", mode == GateMode::kJudge ? 2 * n : 0},
                              {"embedding_max", dedup > 0 ? n : 0}})
            << "\n";
        return kExitOk;
      }
      ensure_writable({out_dir / kInstructionsFile}, g.force);
      cfg.check_credentials();
      const auto set = backends();
      const auto tmpl = cfg.prompt_template();
      std::vector<std::optional<InstructionRecord>> records(collection.size());
      std::vector<std::string> errors(collection.size());
      parallel_for(collection.size(), cfg.max_in_flight, [&](std::size_t i) {
        try {
          auto r = synthesize_instruction(collection.personas[i], tmpl, cfg.instruction_params,
                                          *set.generation, cfg.run_seed);
          const auto gate = quality_gate(r, mode, cfg.gate,
                                         mode == GateMode::kJudge ? set.judge.get() : nullptr);
          r.gate = gate.decision;
          r.difficulty = gate.difficulty;
          r.feasibility = gate.feasibility;
          records[i] = std::move(r);
        } catch (const Error& e) {
          errors[i] = e.what();
        }
      });
      std::vector<InstructionRecord> kept;
      std::size_t failed = 0;
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i]) {
          kept.push_back(std::move(*records[i]));
        } else {
          ++failed;
          err << "failed: " << errors[i] << "\n";
        }
      }
      std::vector<InstructionRecord> accepted;
      for (const auto& r : kept) {
        if (r.gate.accepted) accepted.push_back(r);
      }
      const auto survivors = dedup_instructions(accepted, *set.embedding, dedup);
      std::set<std::string> surviving_ids;
      for (const auto& r : survivors) surviving_ids.insert(r.instruction_id);
      std::vector<Json> lines;
      for (auto& r : kept) {
        if (r.gate.accepted && !surviving_ids.contains(r.instruction_id)) {
          r.gate = GateDecision::from_reasons({GateReason::kDuplicate}, r.gate.gate_mode);
        }
        lines.push_back(instruction_to_json(r));
      }
      prepare_out(out_dir);
      write_jsonl_atomic(out_dir / kInstructionsFile, lines);
      out << survivors.size() << " accepted, " << kept.size() - survivors.size()
          << " rejected, " << failed << " failed\n";
      if (!collection.personas.empty() &&
          static_cast<double>(failed) / static_cast<double>(collection.size()) >
              cfg.max_failure_fraction) {
        return kExitRuntimeFailure;
      }
      return kExitOk;
    }

    if (s_cand->parsed()) {
      std::vector<InstructionRecord> accepted;
      for (const auto& j : read_jsonl(instructions_path)) {
        auto r = instruction_from_json(j);
        if (r.gate.accepted) accepted.push_back(std::move(r));
      }
      SamplingParams params;
      params.k = k_flag.value_or(cfg.k);
      params.temperature = temperature_flag.value_or(cfg.temperature);
      params.allow_hot_sampling = allow_hot || cfg.allow_hot_sampling;
      params.system_prompt = cfg.response_system_prompt;
      params.max_tokens = cfg.response_max_tokens;
      if (params.temperature >= 1.0 && !params.allow_hot_sampling) {
        throw Error(ErrorCode::kConstraint, "temperature must be < 1 (see --allow-hot-sampling)");
      }
      if (g.dry_run) {
        out << dump_line(Json{{"generation", accepted.size() * params.k}}) << "\n";
        return kExitOk;
      }
      ensure_writable({out_dir / kCandidatesFile}, g.force);
      cfg.check_credentials();
      const auto set = backends();
      std::vector<std::optional<CandidateSet>> sets(accepted.size());
      std::size_t failed = 0;
      parallel_for(accepted.size(), cfg.max_in_flight, [&](std::size_t i) {
        try {
          sets[i] = sample_candidates(accepted[i], params, *set.generation, cfg.run_seed);
        } catch (const Error& e) {
          err << "failed: " << accepted[i].instruction_id << ": " << e.what() << "\n";
        }
      });
      std::vector<Json> lines;
      for (const auto& s : sets) {
        if (s) {
          lines.push_back(candidate_set_to_json(*s));
        } else {
          ++failed;
        }
      }
      prepare_out(out_dir);
      write_jsonl_atomic(out_dir / kCandidatesFile, lines);
      out << lines.size() << " candidate sets, " << failed << " failed\n";
      return failed > 0 ? kExitRuntimeFailure : kExitOk;
    }

    if (select->parsed()) {
      std::map<std::string, std::string> text_of;
      for (const auto& j : read_jsonl(instructions_path)) {
        const auto r = instruction_from_json(j);
        text_of[r.instruction_id] = r.text;
      }
      std::vector<CandidateSet> sets;
      for (const auto& j : read_jsonl(candidates_path)) sets.push_back(candidate_set_from_json(j));
      std::size_t calls = 0;
      for (const auto& s : sets) calls += s.k;
      if (g.dry_run) {
        out << dump_line(Json{{"reward", calls}}) << "\n";
        return kExitOk;
      }
      ensure_writable({out_dir / kScoredFile}, g.force);
      cfg.check_credentials();
      const auto set = backends();
      std::vector<std::optional<ScoredCandidateSet>> scored(sets.size());
      parallel_for(sets.size(), cfg.max_in_flight, [&](std::size_t i) {
        auto it = text_of.find(sets[i].instruction_id);
        if (it == text_of.end()) {
          err << "failed: no instruction text for " << sets[i].instruction_id << "\n";
          return;
        }
        try {
          scored[i] = score_candidates(sets[i], it->second, *set.reward);
        } catch (const Error& e) {
          err << "failed: " << sets[i].instruction_id << ": " << e.what() << "\n";
        }
      });
      std::vector<Json> lines;
      for (const auto& s : scored) {
        if (s) lines.push_back(scored_set_to_json(*s));
      }
      prepare_out(out_dir);
      write_jsonl_atomic(out_dir / kScoredFile, lines);
      out << lines.size() << " of " << sets.size() << " sets scored\n";
      return lines.size() == sets.size() ? kExitOk : kExitRuntimeFailure;
    }

    if (exp->parsed()) {
      std::vector<ScoredCandidateSet> sets;
      for (const auto& j : read_jsonl(scored_path)) sets.push_back(scored_set_from_json(j));
      const double min_margin = min_margin_flag.value_or(cfg.min_margin);
      const bool emit_dpo = cfg.emit_dpo && !no_dpo;
      std::vector<SftPair> pairs;
      std::vector<PreferenceTriple> triples;
      ExportSummary summary;
      for (const auto& s : sets) {
        pairs.push_back(select_sft(s));
        if (!emit_dpo) continue;
        auto outcome = select_preference(s, min_margin);
        if (auto* t = std::get_if<PreferenceTriple>(&outcome)) {
          triples.push_back(std::move(*t));
        } else {
          const auto& skip = std::get<PreferenceSkip>(outcome);
          ++(skip.reason == SkipReason::kDegenerate ? summary.skipped_degenerate
                                                    : summary.skipped_margin);
          summary.skips.push_back(skip);
        }
      }
      out << pairs.size() << " SFT pairs, " << triples.size() << " DPO triples\n";
      if (g.dry_run) return kExitOk;
      summary.personas_in = sets.size();
      summary.instructions_accepted = sets.size();
      summary.run_seed = cfg.run_seed;
      summary.digests = Json{{"scored_input", sha256_hex(read_file(scored_path))}};
      export_datasets(pairs, triples, out_dir, summary, g.force);
      return kExitOk;
    }

    if (audit->parsed()) {
      FieldMapping mapping;
      if (!field_map_path.empty()) {
        mapping = FieldMapping::from_json(Json::parse(read_file(field_map_path)));
      }
      const auto records = load_audit_records_file(dataset_path, mapping);
      if (dataset_id.empty()) dataset_id = fs::path(dataset_path).stem().string();
      std::vector<JudgeMetric> metrics;
      for (const auto& m : split_csv(judge_metrics)) metrics.push_back(parse_judge_metric(m));
      if (g.dry_run) {
        out << dump_line(Json{{"records", records.size()},
                              {"embedding", records.size() >= 2 ? records.size() : 0},
                              {"judge_max", records.size() * metrics.size()}})
            << "\n";
        return kExitOk;
      }
      ensure_writable({out_dir / kReportJsonFile, out_dir / kReportMdFile}, g.force);
      std::optional<AuditReport> baseline;
      if (!baseline_path.empty()) {
        baseline = report_from_json(Json::parse(read_file(baseline_path)));
      }
      cfg.check_credentials();
      const auto set = backends();
      std::optional<MndResult> mnd;
      if (records.size() >= 2) {
        MndOptions options;
        options.approximate = approximate;
        mnd = min_neighbor_distances(records, *set.embedding, dataset_id, options,
                                     cfg.max_in_flight);
      }
      std::unique_ptr<TokenCounter> counter;
      if (tokenizer_endpoint.empty()) {
        counter = std::make_unique<WhitespaceTokenCounter>();
      } else {
        counter = std::make_unique<RemoteTokenCounter>(std::make_shared<HttpTransport>(),
                                                       tokenizer_endpoint, tokenizer_model);
      }
      std::optional<LengthStats> lengths;
      if (!records.empty()) lengths = length_stats(records, *counter, dataset_id);
      JudgeRun judged;
      if (!metrics.empty()) {
        judged = judge_dataset(records, metrics, *set.judge, dataset_id, cfg.max_in_flight);
      }
      const auto report = build_report(dataset_id, mnd, lengths, judged.verdicts,
                                       baseline ? &*baseline : nullptr, judged.failures);
      prepare_out(out_dir);
      write_file_atomic(out_dir / kReportJsonFile, report_to_json(report).dump(2) + "\n");
      write_file_atomic(out_dir / kReportMdFile, render_markdown(report));
      out << "wrote " << (out_dir / kReportJsonFile).string() << "\n";
      return kExitOk;
    }

    if (run->parsed() || resume->parsed()) {
      if (g.dry_run) {
        out << plan_run(cfg).dump(2) << "\n";
        return kExitOk;
      }
      Pipeline pipeline(cfg, backends());
      RunOptions options;
      options.force = g.force;
      const Json manifest = run->parsed() ? pipeline.run(options) : pipeline.resume(options);
      out << manifest.at("counts").dump(2) << "\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const Json::exception& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeFailure;
  }
  return kExitUserError;
}

}  // namespace expertsynth
