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


#include "expertsynth/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "expertsynth/error.hpp"

namespace expertsynth {
namespace {

std::size_t rate_cap(double requests_per_minute) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(requests_per_minute)));
}

std::string snippet(const std::string& body) {
  return body.size() <= 200 ? body : body.substr(0, 200) + "...";
}

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
  ~SemaphoreGuard() { sem_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

}  // namespace

std::chrono::milliseconds RetryPolicy::delay(int retry) const {
  const double base = static_cast<double>(initial_backoff.count());
  const double scaled = base * std::pow(std::max(1.0, multiplier), retry);
  const double capped = std::min(scaled, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

bool is_retryable_status(int status) {
  return status == 0 || status == 408 || status == 429 || status >= 500;
}

Gateway::Gateway(BackendConfig config, std::shared_ptr<Transport> transport,
                 std::shared_ptr<Clock> clock, RetryPolicy retry, std::size_t max_in_flight)
    : config_(std::move(config)),
      transport_(std::move(transport)),
      clock_(std::move(clock)),
      retry_(retry),
      limiter_(rate_cap(config_.requests_per_minute), clock_),
      in_flight_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, max_in_flight))) {
  config_.validate();
}

GatewayStats Gateway::stats() const {
  std::lock_guard<std::mutex> lock(mu_);
  return stats_;
}

std::optional<std::size_t> Gateway::embedding_dim() const {
  std::lock_guard<std::mutex> lock(mu_);
  return dim_;
}

void Gateway::require_kind(BackendKind kind) const {
  if (config_.kind != kind) {
    throw Error(ErrorCode::kConfiguration,
                "backend " + config_.backend_id() + " is a " +
                    std::string(backend_kind_name(config_.kind)) + " backend, not " +
                    std::string(backend_kind_name(kind)));
  }
}

Gateway::Outcome Gateway::execute(const Json& body) {
  HttpRequest request;
  request.url = config_.endpoint;
  request.body = dump_line(body);
  request.timeout = std::chrono::milliseconds(config_.timeout_ms);
  request.headers.emplace_back("Content-Type", "application/json");
  if (!config_.auth_env_var.empty() && !config_.is_mock()) {
    const char* secret = std::getenv(config_.auth_env_var.c_str());
    if (secret == nullptr || *secret == '\0') {
      throw Error(ErrorCode::kConfiguration,
                  "credential variable " + config_.auth_env_var + " is not set");
    }
    request.headers.emplace_back("Authorization", std::string("Bearer ") + secret);
  }

  SemaphoreGuard slot(in_flight_);
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++stats_.requests;
  }
  const auto started = clock_->now();
  for (int attempt = 0;; ++attempt) {
    limiter_.acquire();
    const HttpResponse response = transport_->post(request);
    {
      std::lock_guard<std::mutex> lock(mu_);
      ++stats_.attempts;
      if (attempt > 0) ++stats_.retries;
    }
    if (response.status >= 200 && response.status < 300) {
      if (observer_) observer_({attempt, response.status, std::chrono::milliseconds(0)});
      Outcome out;
      try {
        out.body = Json::parse(response.body);
      } catch (const Json::parse_error&) {
        throw Error(ErrorCode::kProtocol,
                    config_.backend_id() + " returned non-JSON body: " + snippet(response.body));
      }
      out.retries = attempt;
      out.latency_ms =
          std::chrono::duration_cast<std::chrono::milliseconds>(clock_->now() - started).count();
      return out;
    }
    const std::string what = response.status == 0
                                 ? "transport failure: " + response.error
                                 : "HTTP " + std::to_string(response.status) + ": " +
                                       snippet(response.body);
    if (!is_retryable_status(response.status)) {
      if (observer_) observer_({attempt, response.status, std::chrono::milliseconds(0)});
      throw Error(ErrorCode::kPermanent, config_.backend_id() + " rejected request: " + what);
    }
    if (attempt >= config_.max_retries) {
      if (observer_) observer_({attempt, response.status, std::chrono::milliseconds(0)});
      throw Error(ErrorCode::kTransport, config_.backend_id() + " failed after " +
                                             std::to_string(attempt + 1) +
                                             " attempts; last: " + what);
    }
    const auto backoff = retry_.delay(attempt);
    if (observer_) observer_({attempt, response.status, backoff});
    clock_->sleep_for(backoff);
  }
}

GenerationResult Gateway::generate_text(const GenerationRequest& request) {
  require_kind(BackendKind::kGeneration);
  request.validate();
  auto outcome = execute(wire::generation_request(config_, request));
  GenerationResult result = wire::parse_generation_response(outcome.body);
  result.backend_id = config_.backend_id();
  result.latency_ms = outcome.latency_ms;
  result.retry_count = outcome.retries;
  return result;
}

EmbeddingVector Gateway::embed_text(std::string_view text) {
  require_kind(BackendKind::kEmbedding);
  if (text.empty()) throw Error(ErrorCode::kContract, "cannot embed empty text");
  auto outcome = execute(wire::embedding_request(config_, text));
  EmbeddingVector v = wire::parse_embedding_response(outcome.body);
  std::lock_guard<std::mutex> lock(mu_);
  if (!dim_) {
    dim_ = v.dim();
  } else if (*dim_ != v.dim()) {
    throw Error(ErrorCode::kConsistency, config_.backend_id() + " returned dim " +
                                             std::to_string(v.dim()) + ", expected " +
                                             std::to_string(*dim_));
  }
  return v;
}

RewardScore Gateway::score_reward(std::string_view instruction, std::string_view response) {
  require_kind(BackendKind::kReward);
  if (instruction.empty() || response.empty()) {
    throw Error(ErrorCode::kContract, "reward scoring needs non-empty instruction and response");
  }
  auto outcome = execute(wire::reward_request(instruction, response));
  return RewardScore{wire::parse_reward_response(outcome.body), config_.backend_id()};
}

}  // namespace expertsynth
