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


#include "expertsynth/rate_limiter.hpp"

#include "expertsynth/error.hpp"

namespace expertsynth {

SlidingWindowRateLimiter::SlidingWindowRateLimiter(std::size_t max_requests,
                                                   std::shared_ptr<Clock> clock,
                                                   Clock::Duration window)
    : max_requests_(max_requests), window_(window), clock_(std::move(clock)) {
  if (max_requests_ == 0) {
    throw Error(ErrorCode::kConfiguration, "requests_per_minute must be > 0");
  }
}

Clock::Duration SlidingWindowRateLimiter::acquire() {
  Clock::Duration waited{0};
  for (;;) {
    Clock::Duration wait{0};
    {
      std::lock_guard<std::mutex> lock(mu_);
      const auto now = clock_->now();
      while (!issued_.empty() && issued_.front() <= now - window_) issued_.pop_front();
      if (issued_.size() < max_requests_) {
        issued_.push_back(now);
        return waited;
      }
      wait = issued_.front() + window_ - now;
    }
    clock_->sleep_for(wait);
    waited += wait;
  }
}

}  // namespace expertsynth
