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
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string_view>

#include "expertsynth/backend.hpp"
#include "expertsynth/clock.hpp"
#include "expertsynth/rate_limiter.hpp"
#include "expertsynth/transport.hpp"

namespace expertsynth {

// Exponential backoff; delay(n) is the wait before retry n (0-based) and is
// non-decreasing in n.
struct RetryPolicy {
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30000};

  std::chrono::milliseconds delay(int retry) const;
};

// HTTP statuses worth another attempt: no response, 408, 429 and 5xx.
bool is_retryable_status(int status);

struct AttemptEvent {
  int attempt = 0;  // 0-based
  int status = 0;
  std::chrono::milliseconds backoff{0};  // wait scheduled after this attempt
};

struct GatewayStats {
  std::size_t requests = 0;
  std::size_t attempts = 0;
  std::size_t retries = 0;
};

// Client for one configured backend. Safe for concurrent callers: at most
// `max_in_flight` requests are outstanding, further callers queue.
class Gateway {
 public:
  Gateway(BackendConfig config, std::shared_ptr<Transport> transport,
          std::shared_ptr<Clock> clock, RetryPolicy retry = {}, std::size_t max_in_flight = 4);

  // Require kind == generation.
  GenerationResult generate_text(const GenerationRequest& request);
  // Require kind == embedding.
  EmbeddingVector embed_text(std::string_view text);
  // Require kind == reward.
  RewardScore score_reward(std::string_view instruction, std::string_view response);

  const BackendConfig& config() const { return config_; }
  GatewayStats stats() const;
  std::optional<std::size_t> embedding_dim() const;

  void set_attempt_observer(std::function<void(const AttemptEvent&)> observer) {
    observer_ = std::move(observer);
  }

 private:
  struct Outcome {
    Json body;
    int retries = 0;
    std::int64_t latency_ms = 0;
  };

  void require_kind(BackendKind kind) const;
  Outcome execute(const Json& body);

  BackendConfig config_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<Clock> clock_;
  RetryPolicy retry_;
  SlidingWindowRateLimiter limiter_;
  std::counting_semaphore<> in_flight_;
  std::function<void(const AttemptEvent&)> observer_;

  mutable std::mutex mu_;
  GatewayStats stats_;
  std::optional<std::size_t> dim_;
};

}  // namespace expertsynth
