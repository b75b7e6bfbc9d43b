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
#include <memory>

namespace expertsynth {

// Time source for rate limiting, backoff and latency measurement.
class Clock {
 public:
  using Duration = std::chrono::nanoseconds;

  virtual ~Clock() = default;
  // Monotonic time since an arbitrary epoch.
  virtual Duration now() const = 0;
  virtual void sleep_for(Duration d) = 0;
};

class SteadyClock final : public Clock {
 public:
  Duration now() const override;
  void sleep_for(Duration d) override;
};

// Virtual time: only sleep_for advances it. Mock backends run on this so
// throttling and backoff cost no wall time and latencies are exactly zero.
class VirtualClock final : public Clock {
 public:
  Duration now() const override { return Duration(now_.load()); }
  void sleep_for(Duration d) override;
  void advance(Duration d) { sleep_for(d); }

 private:
  std::atomic<Duration::rep> now_{0};
};

std::shared_ptr<Clock> default_clock();

}  // namespace expertsynth
