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

#include <atomic>
#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace expertsynth {

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  std::chrono::milliseconds timeout{120000};
};

// status == 0 means the request never produced an HTTP response
// (connection refused, timeout, TLS failure); `error` says why.
struct HttpResponse {
  int status = 0;
  std::string body;
  std::string error;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

// cpp-httplib backed transport for http:// and https:// endpoints.
class HttpTransport final : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override;
};

struct MockOptions {
  std::size_t embedding_dim = 64;
  // Distinct answers a mock model can give to one prompt at temperature > 0.
  std::size_t response_variants = 4;
};

// Deterministic offline stand-in for all three backend kinds. It speaks the
// same JSON wire protocol as the real endpoints, so the full client path is
// exercised. Dispatch is by request shape: "messages" -> generation,
// "input" -> embedding, "instruction" -> reward.
//
// Generation requests whose system prompt is a judge rubric get a bare
// integer 4..10 back.
class MockTransport final : public Transport {
 public:
  explicit MockTransport(MockOptions options = {}) : options_(options) {}

  HttpResponse post(const HttpRequest& request) override;

  std::size_t generation_calls() const { return generation_calls_.load(); }
  std::size_t judge_calls() const { return judge_calls_.load(); }
  std::size_t embedding_calls() const { return embedding_calls_.load(); }
  std::size_t reward_calls() const { return reward_calls_.load(); }
  std::size_t total_calls() const {
    return generation_calls() + judge_calls() + embedding_calls() + reward_calls();
  }

  // Exposed so tests can predict mock outputs without going through HTTP.
  static std::vector<double> mock_embedding(std::string_view model, std::string_view text,
                                            std::size_t dim);
  static double mock_reward(std::string_view instruction, std::string_view response);

 private:
  MockOptions options_;
  std::atomic<std::size_t> generation_calls_{0};
  std::atomic<std::size_t> judge_calls_{0};
  std::atomic<std::size_t> embedding_calls_{0};
  std::atomic<std::size_t> reward_calls_{0};
};

}  // namespace expertsynth
