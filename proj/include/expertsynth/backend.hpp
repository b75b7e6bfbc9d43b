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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "expertsynth/jsonl.hpp"

namespace expertsynth {

enum class BackendKind { kGeneration, kEmbedding, kReward };

std::string_view backend_kind_name(BackendKind kind);
BackendKind parse_backend_kind(std::string_view name);

struct BackendConfig {
  BackendKind kind = BackendKind::kGeneration;
  std::string endpoint;      // http(s)://... or mock://<name>
  std::string model_name;
  std::string auth_env_var;  // empty = no credential
  int max_retries = 3;
  double requests_per_minute = 600;
  int timeout_ms = 120000;

  // Throws kConfiguration when an invariant is violated.
  void validate() const;
  bool is_mock() const { return endpoint.rfind("mock://", 0) == 0; }
  // "<model_name>@<endpoint>"
  std::string backend_id() const;
};

struct GenerationRequest {
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.7;
  int max_tokens = 4096;
  std::optional<std::int64_t> seed;

  void validate() const;
};

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct GenerationResult {
  std::string text;
  std::string backend_id;
  std::int64_t latency_ms = 0;
  int retry_count = 0;
  std::optional<TokenUsage> usage;
};

struct RewardScore {
  double value = 0.0;
  std::string backend_id;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::size_t dim() const { return values.size(); }
};

double l2_distance(const EmbeddingVector& a, const EmbeddingVector& b);

// Wire format. Field names are documented in docs/protocol.md and pinned by
// golden-file tests.
namespace wire {

Json generation_request(const BackendConfig& cfg, const GenerationRequest& req);
Json embedding_request(const BackendConfig& cfg, std::string_view text);
Json reward_request(std::string_view instruction, std::string_view response);

// Each parser throws kProtocol on an unusable payload.
GenerationResult parse_generation_response(const Json& body);
EmbeddingVector parse_embedding_response(const Json& body);
double parse_reward_response(const Json& body);

}  // namespace wire

}  // namespace expertsynth
