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
#include <deque>
#include <memory>
#include <mutex>

#include "expertsynth/clock.hpp"

namespace expertsynth {

// Sliding-window limiter: at most `max_requests` acquisitions in any
// half-open window of length `window`. Thread-safe.
class SlidingWindowRateLimiter {
 public:
  SlidingWindowRateLimiter(std::size_t max_requests, std::shared_ptr<Clock> clock,
                           Clock::Duration window = std::chrono::seconds(60));

  // Blocks (via the clock) until a slot is free. Returns the time waited.
  Clock::Duration acquire();

  std::size_t max_requests() const { return max_requests_; }

 private:
  std::size_t max_requests_;
  Clock::Duration window_;
  std::shared_ptr<Clock> clock_;
  std::mutex mu_;
  std::deque<Clock::Duration> issued_;
};

}  // namespace expertsynth
