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
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "expertsynth/backend.hpp"
#include "expertsynth/candidate_sampler.hpp"
#include "expertsynth/clock.hpp"
#include "expertsynth/gateway.hpp"
#include "expertsynth/instruction_forge.hpp"
#include "expertsynth/jsonl.hpp"
#include "expertsynth/persona_store.hpp"
#include "expertsynth/transport.hpp"

namespace expertsynth {

struct BackendsConfig {
  BackendConfig generation;
  BackendConfig embedding;
  BackendConfig reward;
  BackendConfig judge;  // a generation-kind backend used with the rubric prompts

  // All four default to mock:// endpoints.
  static BackendsConfig mock_defaults();
};

// The whole run, loaded from one JSON document (see docs/config.md).
struct RunConfig {
  std::int64_t run_seed = 0;
  std::filesystem::path persona_source;
  std::size_t num_personas = 0;  // 0 = every persona surviving the filter
  PersonaFilterPolicy filter;

  GateMode gate_mode = GateMode::kJudge;
  GateThresholds gate;

  std::optional<std::filesystem::path> template_path;  // default: built-in v1
  GenerationParams instruction_params{"", 0.7, 2048};

  std::size_t k = 5;
  double temperature = 0.7;
  bool allow_hot_sampling = false;
  std::string response_system_prompt;
  int response_max_tokens = 4096;

  bool emit_dpo = true;
  double min_margin = 0.0;
  double dedup_min_distance = 0.3;
  double max_failure_fraction = 0.1;
  std::size_t max_in_flight = 4;
  std::filesystem::path out_dir = "out";
  bool audit = false;

  BackendsConfig backends = BackendsConfig::mock_defaults();
  MockOptions mock;

  // Relative paths inside `j` resolve against `base_dir`.
  static RunConfig from_json(const Json& j, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);
  Json to_json() const;

  // kConfiguration on any invariant violation (k >= 2 when DPO output is
  // requested, thresholds in range, backends well-formed).
  void validate() const;
  // kConfiguration if a non-mock backend names an unset credential variable.
  void check_credentials() const;

  PromptTemplate prompt_template() const;

  // Digest over every setting that affects output bytes. Throughput knobs
  // (max_in_flight, retries, rate caps, timeouts, out_dir) are excluded so a
  // resumed run may change them.
  std::string digest(std::string_view persona_source_digest) const;
};

// A transport plus the clock it should be paced by.
struct TransportBinding {
  std::shared_ptr<Transport> transport;
  std::shared_ptr<Clock> clock;
};

using TransportFactory = std::function<TransportBinding(const BackendConfig&)>;

// mock:// -> MockTransport on a VirtualClock; http(s):// -> HttpTransport on
// the steady clock.
TransportFactory default_transport_factory(const MockOptions& mock = {});

struct BackendSet {
  std::shared_ptr<Gateway> generation;
  std::shared_ptr<Gateway> embedding;
  std::shared_ptr<Gateway> reward;
  std::shared_ptr<Gateway> judge;
};

BackendSet make_backends(const BackendsConfig& config, std::size_t max_in_flight,
                         const TransportFactory& factory);

}  // namespace expertsynth
