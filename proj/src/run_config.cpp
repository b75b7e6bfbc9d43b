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


#include "expertsynth/run_config.hpp"

#include <cmath>
#include <cstdlib>

#include "expertsynth/error.hpp"
#include "expertsynth/hashing.hpp"

namespace expertsynth {
namespace {

BackendConfig backend_from_json(const Json& j, BackendKind kind, BackendConfig base) {
  base.kind = kind;
  base.endpoint = j.value("endpoint", base.endpoint);
  base.model_name = j.value("model_name", base.model_name);
  base.auth_env_var = j.value("auth_env_var", base.auth_env_var);
  base.max_retries = j.value("max_retries", base.max_retries);
  base.requests_per_minute = j.value("requests_per_minute", base.requests_per_minute);
  base.timeout_ms = j.value("timeout_ms", base.timeout_ms);
  if (j.contains("api_key") || j.contains("token")) {
    throw Error(ErrorCode::kConfiguration,
                "credentials must come from auth_env_var, not the config file");
  }
  return base;
}

Json backend_to_json(const BackendConfig& b) {
  return Json{{"endpoint", b.endpoint},
              {"model_name", b.model_name},
              {"auth_env_var", b.auth_env_var},
              {"max_retries", b.max_retries},
              {"requests_per_minute", b.requests_per_minute},
              {"timeout_ms", b.timeout_ms}};
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

}  // namespace

BackendsConfig BackendsConfig::mock_defaults() {
  BackendsConfig b;
  b.generation = {BackendKind::kGeneration, "mock://generation", "gpt-4o", "", 3, 600, 120000};
  b.embedding = {BackendKind::kEmbedding, "mock://embedding", "all-mpnet-base-v2", "", 3, 600,
                 60000};
  b.reward = {BackendKind::kReward, "mock://reward", "Skywork-Reward-V2-Llama-3.1-8B", "", 3, 600,
              60000};
  b.judge = {BackendKind::kGeneration, "mock://judge", "gpt-4o", "", 3, 600, 60000};
  return b;
}

RunConfig RunConfig::from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorCode::kConfiguration, "config must be a JSON object");
  RunConfig c;
  try {
    c.run_seed = j.value("run_seed", c.run_seed);
    if (j.contains("persona_source")) {
      c.persona_source = resolve(base_dir, j["persona_source"].get<std::string>());
    }
    c.num_personas = j.value("num_personas", c.num_personas);
    if (j.contains("filter")) {
      const auto& f = j["filter"];
      c.filter.min_text_length = f.value("min_text_length", c.filter.min_text_length);
      c.filter.blocklist = f.value("blocklist", c.filter.blocklist);
      c.filter.require_domain = f.value("require_domain", c.filter.require_domain);
    }
    if (j.contains("gate")) {
      const auto& g = j["gate"];
      c.gate_mode = parse_gate_mode(g.value("mode", std::string("judge")));
      c.gate.min_difficulty = g.value("min_difficulty", c.gate.min_difficulty);
      c.gate.min_feasibility = g.value("min_feasibility", c.gate.min_feasibility);
      c.gate.min_chars = g.value("min_chars", c.gate.min_chars);
      c.gate.blocklist = g.value("blocklist", c.gate.blocklist);
    }
    if (j.contains("instruction")) {
      const auto& i = j["instruction"];
      if (i.contains("template_path") && !i["template_path"].is_null()) {
        c.template_path = resolve(base_dir, i["template_path"].get<std::string>());
      }
      c.instruction_params.system_prompt =
          i.value("system_prompt", c.instruction_params.system_prompt);
      c.instruction_params.temperature = i.value("temperature", c.instruction_params.temperature);
      c.instruction_params.max_tokens = i.value("max_tokens", c.instruction_params.max_tokens);
    }
    if (j.contains("sampling")) {
      const auto& s = j["sampling"];
      c.k = s.value("k", c.k);
      c.temperature = s.value("temperature", c.temperature);
      c.allow_hot_sampling = s.value("allow_hot_sampling", c.allow_hot_sampling);
      c.response_system_prompt = s.value("system_prompt", c.response_system_prompt);
      c.response_max_tokens = s.value("max_tokens", c.response_max_tokens);
    }
    if (j.contains("selection")) {
      const auto& s = j["selection"];
      c.emit_dpo = s.value("emit_dpo", c.emit_dpo);
      c.min_margin = s.value("min_margin", c.min_margin);
    }
    c.dedup_min_distance = j.value("dedup_min_distance", c.dedup_min_distance);
    c.max_failure_fraction = j.value("max_failure_fraction", c.max_failure_fraction);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    if (j.contains("out_dir")) c.out_dir = resolve(base_dir, j["out_dir"].get<std::string>());
    c.audit = j.value("audit", c.audit);
    if (j.contains("backends")) {
      const auto& b = j["backends"];
      if (b.contains("generation")) {
        c.backends.generation =
            backend_from_json(b["generation"], BackendKind::kGeneration, c.backends.generation);
      }
      if (b.contains("embedding")) {
        c.backends.embedding =
            backend_from_json(b["embedding"], BackendKind::kEmbedding, c.backends.embedding);
      }
      if (b.contains("reward")) {
        c.backends.reward = backend_from_json(b["reward"], BackendKind::kReward, c.backends.reward);
      }
      if (b.contains("judge")) {
        c.backends.judge = backend_from_json(b["judge"], BackendKind::kGeneration, c.backends.judge);
      }
    }
    if (j.contains("mock")) {
      c.mock.embedding_dim = j["mock"].value("embedding_dim", c.mock.embedding_dim);
      c.mock.response_variants = j["mock"].value("response_variants", c.mock.response_variants);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kConfiguration, std::string("bad config value: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kConfiguration, path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

Json RunConfig::to_json() const {
  Json j;
  j["run_seed"] = run_seed;
  j["persona_source"] = persona_source.string();
  j["num_personas"] = num_personas;
  j["filter"] = Json{{"min_text_length", filter.min_text_length},
                     {"blocklist", filter.blocklist},
                     {"require_domain", filter.require_domain}};
  j["gate"] = Json{{"mode", gate_mode_name(gate_mode)},
                   {"min_difficulty", gate.min_difficulty},
                   {"min_feasibility", gate.min_feasibility},
                   {"min_chars", gate.min_chars},
                   {"blocklist", gate.blocklist}};
  j["instruction"] = Json{{"template_path", template_path ? Json(template_path->string()) : Json()},
                          {"system_prompt", instruction_params.system_prompt},
                          {"temperature", instruction_params.temperature},
                          {"max_tokens", instruction_params.max_tokens}};
  j["sampling"] = Json{{"k", k},
                       {"temperature", temperature},
                       {"allow_hot_sampling", allow_hot_sampling},
                       {"system_prompt", response_system_prompt},
                       {"max_tokens", response_max_tokens}};
  j["selection"] = Json{{"emit_dpo", emit_dpo}, {"min_margin", min_margin}};
  j["dedup_min_distance"] = dedup_min_distance;
  j["max_failure_fraction"] = max_failure_fraction;
  j["max_in_flight"] = max_in_flight;
  j["out_dir"] = out_dir.string();
  j["audit"] = audit;
  j["backends"] = Json{{"generation", backend_to_json(backends.generation)},
                       {"embedding", backend_to_json(backends.embedding)},
                       {"reward", backend_to_json(backends.reward)},
                       {"judge", backend_to_json(backends.judge)}};
  j["mock"] = Json{{"embedding_dim", mock.embedding_dim},
                   {"response_variants", mock.response_variants}};
  return j;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kConfiguration, msg); };
  if (persona_source.empty()) fail("persona_source is required");
  filter.validate();
  if (k < 1) fail("sampling.k must be >= 1");
  if (emit_dpo && k < 2) fail("sampling.k must be >= 2 when DPO output is requested");
  if (!std::isfinite(temperature) || temperature < 0) fail("sampling.temperature must be >= 0");
  if (temperature >= 1.0 && !allow_hot_sampling) {
    fail("sampling.temperature must be < 1 unless allow_hot_sampling is set");
  }
  if (!(min_margin >= 0)) fail("selection.min_margin must be >= 0");
  if (!(dedup_min_distance >= 0)) fail("dedup_min_distance must be >= 0");
  if (!(max_failure_fraction >= 0 && max_failure_fraction <= 1)) {
    fail("max_failure_fraction must be in [0, 1]");
  }
  if (max_in_flight < 1) fail("max_in_flight must be >= 1");
  if (gate.min_difficulty < 1 || gate.min_difficulty > 10 || gate.min_feasibility < 1 ||
      gate.min_feasibility > 10) {
    fail("gate thresholds must be within 1..10");
  }
  for (const auto& term : gate.blocklist) {
    if (term.empty()) fail("gate.blocklist entries must be non-empty");
  }
  if (mock.embedding_dim == 0) fail("mock.embedding_dim must be > 0");
  GenerationRequest probe;
  probe.user_prompt = "x";
  probe.temperature = instruction_params.temperature;
  probe.max_tokens = instruction_params.max_tokens;
  probe.validate();
  if (response_max_tokens <= 0) fail("sampling.max_tokens must be > 0");
  backends.generation.validate();
  backends.embedding.validate();
  backends.reward.validate();
  backends.judge.validate();
}

void RunConfig::check_credentials() const {
  for (const auto* b : {&backends.generation, &backends.embedding, &backends.reward,
                        &backends.judge}) {
    if (b->is_mock() || b->auth_env_var.empty()) continue;
    const char* v = std::getenv(b->auth_env_var.c_str());
    if (v == nullptr || *v == '\0') {
      throw Error(ErrorCode::kConfiguration, "credential variable " + b->auth_env_var +
                                                 " (for " + b->backend_id() + ") is not set");
    }
  }
}

PromptTemplate RunConfig::prompt_template() const {
  if (template_path) return PromptTemplate(read_file(*template_path));
  return PromptTemplate::builtin_v1();
}

std::string RunConfig::digest(std::string_view persona_source_digest) const {
  auto identity = [](const BackendConfig& b) {
    return Json{{"endpoint", b.endpoint}, {"model_name", b.model_name}};
  };
  Json j;
  j["run_seed"] = run_seed;
  j["persona_source_digest"] = std::string(persona_source_digest);
  j["num_personas"] = num_personas;
  j["filter"] = Json{{"min_text_length", filter.min_text_length},
                     {"blocklist", filter.blocklist},
                     {"require_domain", filter.require_domain}};
  j["gate"] = Json{{"mode", gate_mode_name(gate_mode)},
                   {"min_difficulty", gate.min_difficulty},
                   {"min_feasibility", gate.min_feasibility},
                   {"min_chars", gate.min_chars},
                   {"blocklist", gate.blocklist}};
  j["template_digest"] = prompt_template().digest();
  j["instruction"] = Json{{"system_prompt", instruction_params.system_prompt},
                          {"temperature", instruction_params.temperature},
                          {"max_tokens", instruction_params.max_tokens}};
  j["sampling"] = Json{{"k", k},
                       {"temperature", temperature},
                       {"allow_hot_sampling", allow_hot_sampling},
                       {"system_prompt", response_system_prompt},
                       {"max_tokens", response_max_tokens}};
  j["selection"] = Json{{"emit_dpo", emit_dpo}, {"min_margin", min_margin}};
  j["dedup_min_distance"] = dedup_min_distance;
  j["backends"] = Json{{"generation", identity(backends.generation)},
                       {"embedding", identity(backends.embedding)},
                       {"reward", identity(backends.reward)},
                       {"judge", identity(backends.judge)}};
  j["mock"] = Json{{"embedding_dim", mock.embedding_dim},
                   {"response_variants", mock.response_variants}};
  return sha256_hex(dump_line(j));
}

TransportFactory default_transport_factory(const MockOptions& mock) {
  auto http = std::make_shared<HttpTransport>();
  return [http, mock](const BackendConfig& cfg) -> TransportBinding {
    if (cfg.is_mock()) {
      return {std::make_shared<MockTransport>(mock), std::make_shared<VirtualClock>()};
    }
    return {http, default_clock()};
  };
}

BackendSet make_backends(const BackendsConfig& config, std::size_t max_in_flight,
                         const TransportFactory& factory) {
  auto build = [&](const BackendConfig& cfg) {
    auto binding = factory(cfg);
    return std::make_shared<Gateway>(cfg, binding.transport, binding.clock, RetryPolicy{},
                                     max_in_flight);
  };
  return BackendSet{build(config.generation), build(config.embedding), build(config.reward),
                    build(config.judge)};
}

}  // namespace expertsynth
