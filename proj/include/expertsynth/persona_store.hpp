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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "expertsynth/jsonl.hpp"

namespace expertsynth {

struct Persona {
  std::string id;
  std::string text;
  std::optional<std::string> domain;

  bool operator==(const Persona&) const = default;
};

// What counts as a "complex" persona is operationalized as a minimum length
// (in Unicode code points of the trimmed text) plus an optional domain tag.
struct PersonaFilterPolicy {
  std::size_t min_text_length = 0;
  std::vector<std::string> blocklist;  // case-insensitive substrings
  bool require_domain = false;

  // Throws kConfiguration on an empty blocklist entry.
  void validate() const;
};

// Immutable after load; safe to share across workers.
struct PersonaCollection {
  std::vector<Persona> personas;
  std::string source_digest;

  std::size_t size() const { return personas.size(); }
};

// One JSON object per line: {"id"?, "text", "domain"?}. A missing id becomes
// the SHA-256 hex digest of the text. Errors: kParse (with line), kConflict
// on duplicate ids.
PersonaCollection load_personas(std::string_view content);
PersonaCollection load_personas_file(const std::filesystem::path& path);

PersonaCollection filter_personas(const PersonaCollection& collection,
                                  const PersonaFilterPolicy& policy);

// Draws n personas without replacement, skipping any id in `consumed`.
// Output order is the draw order. kCapacity if fewer than n are available.
PersonaCollection sample_personas(const PersonaCollection& collection, std::size_t n,
                                  std::uint64_t seed,
                                  const std::set<std::string>& consumed = {});

Json persona_to_json(const Persona& persona);
std::string personas_to_jsonl(const PersonaCollection& collection);
// Sidecar manifest describing an emitted persona file.
Json persona_manifest(const PersonaCollection& collection, std::string_view output_digest);

// Helpers shared with the instruction gate.
std::string_view trim(std::string_view text);
std::size_t utf8_length(std::string_view text);
bool contains_case_insensitive(std::string_view haystack, std::string_view needle);

}  // namespace expertsynth
