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


#include "expertsynth/backend.hpp"

#include <cctype>
#include <cmath>

#include "expertsynth/error.hpp"

namespace expertsynth {

std::string_view backend_kind_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::kGeneration: return "generation";
    case BackendKind::kEmbedding: return "embedding";
    case BackendKind::kReward: return "reward";
  }
  return "unknown";
}

BackendKind parse_backend_kind(std::string_view name) {
  if (name == "generation") return BackendKind::kGeneration;
  if (name == "embedding") return BackendKind::kEmbedding;
  if (name == "reward") return BackendKind::kReward;
  throw Error(ErrorCode::kConfiguration, "unknown backend kind '" + std::string(name) + "'");
}

void BackendConfig::validate() const {
  if (endpoint.empty()) throw Error(ErrorCode::kConfiguration, "backend endpoint is empty");
  if (!is_mock() && endpoint.rfind("http://", 0) != 0 && endpoint.rfind("https://", 0) != 0) {
    throw Error(ErrorCode::kConfiguration, "unsupported endpoint scheme: " + endpoint);
  }
  if (max_retries < 0) throw Error(ErrorCode::kConfiguration, "max_retries must be >= 0");
  if (!(requests_per_minute > 0) || !std::isfinite(requests_per_minute)) {
    throw Error(ErrorCode::kConfiguration, "requests_per_minute must be > 0");
  }
  if (timeout_ms <= 0) throw Error(ErrorCode::kConfiguration, "timeout_ms must be > 0");
}

std::string BackendConfig::backend_id() const { return model_name + "@" + endpoint; }

void GenerationRequest::validate() const {
  if (user_prompt.empty()) throw Error(ErrorCode::kContract, "user_prompt must be non-empty");
  if (!std::isfinite(temperature) || temperature < 0 || temperature >= 2) {
    throw Error(ErrorCode::kConstraint, "temperature must be finite and in [0, 2)");
  }
  if (max_tokens <= 0) throw Error(ErrorCode::kContract, "max_tokens must be > 0");
}

double l2_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kConsistency, "embedding dim mismatch: " + std::to_string(a.dim()) +
                                             " vs " + std::to_string(b.dim()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a.values[i] - b.values[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

namespace wire {

Json generation_request(const BackendConfig& cfg, const GenerationRequest& req) {
  Json body;
  body["model"] = cfg.model_name;
  Json messages = Json::array();
  if (!req.system_prompt.empty()) {
    messages.push_back(Json{{"role", "system"}, {"content", req.system_prompt}});
  }
  messages.push_back(Json{{"role", "user"}, {"content", req.user_prompt}});
  body["messages"] = std::move(messages);
  body["temperature"] = req.temperature;
  body["max_tokens"] = req.max_tokens;
  if (req.seed) body["seed"] = *req.seed;
  return body;
}

Json embedding_request(const BackendConfig& cfg, std::string_view text) {
  Json body;
  body["model"] = cfg.model_name;
  body["input"] = std::string(text);
  return body;
}

Json reward_request(std::string_view instruction, std::string_view response) {
  Json body;
  body["instruction"] = std::string(instruction);
  body["response"] = std::string(response);
  return body;
}

GenerationResult parse_generation_response(const Json& body) {
  const Json* content = nullptr;
  if (body.is_object() && body.contains("choices") && body["choices"].is_array() &&
      !body["choices"].empty()) {
    const auto& choice = body["choices"][0];
    if (choice.is_object() && choice.contains("message") && choice["message"].is_object() &&
        choice["message"].contains("content")) {
      content = &choice["message"]["content"];
    }
  }
  if (content == nullptr || !content->is_string()) {
    throw Error(ErrorCode::kProtocol, "generation response lacks choices[0].message.content");
  }
  GenerationResult result;
  result.text = content->get<std::string>();
  while (!result.text.empty() && std::isspace(static_cast<unsigned char>(result.text.back()))) {
    result.text.pop_back();
  }
  if (result.text.empty()) throw Error(ErrorCode::kProtocol, "empty response text");
  if (body.contains("usage") && body["usage"].is_object()) {
    const auto& usage = body["usage"];
    TokenUsage u;
    u.prompt_tokens = usage.value("prompt_tokens", std::int64_t{0});
    u.completion_tokens = usage.value("completion_tokens", std::int64_t{0});
    result.usage = u;
  }
  return result;
}

EmbeddingVector parse_embedding_response(const Json& body) {
  if (!body.is_object() || !body.contains("data") || !body["data"].is_array() ||
      body["data"].empty() || !body["data"][0].is_object() ||
      !body["data"][0].contains("embedding") || !body["data"][0]["embedding"].is_array()) {
    throw Error(ErrorCode::kProtocol, "embedding response lacks data[0].embedding");
  }
  EmbeddingVector v;
  for (const auto& x : body["data"][0]["embedding"]) {
    if (!x.is_number()) throw Error(ErrorCode::kProtocol, "non-numeric embedding entry");
    const double value = x.get<double>();
    if (!std::isfinite(value)) throw Error(ErrorCode::kProtocol, "non-finite embedding entry");
    v.values.push_back(value);
  }
  if (v.values.empty()) throw Error(ErrorCode::kProtocol, "empty embedding");
  return v;
}

double parse_reward_response(const Json& body) {
  if (!body.is_object() || !body.contains("score") || !body["score"].is_number()) {
    throw Error(ErrorCode::kProtocol, "reward response lacks numeric 'score'");
  }
  const double value = body["score"].get<double>();
  if (!std::isfinite(value)) throw Error(ErrorCode::kProtocol, "reward score is not finite");
  return value;
}

}  // namespace wire
}  // namespace expertsynth
