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


#include "expertsynth/clock.hpp"

#include <thread>

namespace expertsynth {

Clock::Duration SteadyClock::now() const {
  return std::chrono::duration_cast<Duration>(
      std::chrono::steady_clock::now().time_since_epoch());
}

void SteadyClock::sleep_for(Duration d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

void VirtualClock::sleep_for(Duration d) {
  if (d.count() > 0) now_.fetch_add(d.count());
}

std::shared_ptr<Clock> default_clock() {
  static auto clock = std::make_shared<SteadyClock>();
  return clock;
}

}  // namespace expertsynth
