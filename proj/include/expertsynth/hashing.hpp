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

#include <cstdint>
#include <string>
#include <string_view>

namespace expertsynth {

// Lowercase hex SHA-256 of the raw bytes.
std::string sha256_hex(std::string_view data);

// First 8 bytes of SHA-256, big-endian.
std::uint64_t hash64(std::string_view data);

// Per-candidate generation seed: a pure function of the run seed, the
// instruction id and the candidate index. Always fits in a signed int64.
std::int64_t derive_seed(std::int64_t run_seed, std::string_view instruction_id,
                         std::size_t index);

// SplitMix64. Small, fast and bit-reproducible across standard libraries,
// unlike the std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t uniform_below(std::uint64_t bound);
  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01();

 private:
  std::uint64_t state_;
};

}  // namespace expertsynth
