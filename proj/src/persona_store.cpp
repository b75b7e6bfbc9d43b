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


#include "expertsynth/persona_store.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <unordered_set>

#include "expertsynth/error.hpp"
#include "expertsynth/hashing.hpp"

namespace expertsynth {

std::string_view trim(std::string_view text) {
  constexpr std::string_view kSpace = " \t\r\n\f\v";
  const auto begin = text.find_first_not_of(kSpace);
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(kSpace);
  return text.substr(begin, end - begin + 1);
}

std::size_t utf8_length(std::string_view text) {
  return static_cast<std::size_t>(std::count_if(text.begin(), text.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

bool contains_case_insensitive(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return true;
  auto lower = [](char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  };
  auto it = std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end(),
                        [&](char a, char b) { return lower(a) == lower(b); });
  return it != haystack.end();
}

void PersonaFilterPolicy::validate() const {
  for (const auto& term : blocklist) {
    if (term.empty()) throw Error(ErrorCode::kConfiguration, "blocklist entries must be non-empty");
  }
}

PersonaCollection load_personas(std::string_view content) {
  PersonaCollection out;
  out.source_digest = sha256_hex(content);
  std::unordered_set<std::string> seen;
  for_each_jsonl(content, [&](const Json& record, std::size_t line) {
    if (!record.is_object()) throw Error(ErrorCode::kParse, "record is not an object", line);
    auto text_it = record.find("text");
    if (text_it == record.end() || !text_it->is_string()) {
      throw Error(ErrorCode::kParse, "missing string field 'text'", line);
    }
    Persona persona;
    persona.text = text_it->get<std::string>();
    if (trim(persona.text).empty()) throw Error(ErrorCode::kParse, "empty 'text'", line);

    if (auto id_it = record.find("id"); id_it != record.end() && !id_it->is_null()) {
      if (!id_it->is_string() || id_it->get<std::string>().empty()) {
        throw Error(ErrorCode::kParse, "'id' must be a non-empty string", line);
      }
      persona.id = id_it->get<std::string>();
    } else {
      persona.id = sha256_hex(persona.text);
    }
    if (auto dom_it = record.find("domain"); dom_it != record.end() && !dom_it->is_null()) {
      if (!dom_it->is_string()) throw Error(ErrorCode::kParse, "'domain' must be a string", line);
      persona.domain = dom_it->get<std::string>();
    }
    if (!seen.insert(persona.id).second) {
      throw Error(ErrorCode::kConflict, "duplicate persona id '" + persona.id + "' at line " +
                                            std::to_string(line));
    }
    out.personas.push_back(std::move(persona));
  });
  return out;
}

PersonaCollection load_personas_file(const std::filesystem::path& path) {
  return load_personas(read_file(path));
}

PersonaCollection filter_personas(const PersonaCollection& collection,
                                  const PersonaFilterPolicy& policy) {
  policy.validate();
  PersonaCollection out;
  out.source_digest = collection.source_digest;
  for (const auto& persona : collection.personas) {
    const auto body = trim(persona.text);
    if (utf8_length(body) < policy.min_text_length) continue;
    if (policy.require_domain && (!persona.domain || trim(*persona.domain).empty())) continue;
    const bool blocked = std::any_of(policy.blocklist.begin(), policy.blocklist.end(),
                                     [&](const std::string& term) {
                                       return contains_case_insensitive(persona.text, term);
                                     });
    if (blocked) continue;
    out.personas.push_back(persona);
  }
  return out;
}

PersonaCollection sample_personas(const PersonaCollection& collection, std::size_t n,
                                  std::uint64_t seed, const std::set<std::string>& consumed) {
  std::vector<std::size_t> pool;
  pool.reserve(collection.size());
  for (std::size_t i = 0; i < collection.size(); ++i) {
    if (!consumed.contains(collection.personas[i].id)) pool.push_back(i);
  }
  if (n > pool.size()) {
    throw Error(ErrorCode::kCapacity, "requested " + std::to_string(n) + " personas but only " +
                                          std::to_string(pool.size()) + " are available");
  }
  // Partial Fisher-Yates: the first n slots are the sample.
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  PersonaCollection out;
  out.source_digest = collection.source_digest;
  out.personas.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.personas.push_back(collection.personas[pool[i]]);
  return out;
}

Json persona_to_json(const Persona& persona) {
  Json j;
  j["id"] = persona.id;
  j["text"] = persona.text;
  if (persona.domain) j["domain"] = *persona.domain;
  return j;
}

std::string personas_to_jsonl(const PersonaCollection& collection) {
  std::string out;
  for (const auto& persona : collection.personas) {
    out += dump_line(persona_to_json(persona));
    out.push_back('\n');
  }
  return out;
}

Json persona_manifest(const PersonaCollection& collection, std::string_view output_digest) {
  Json j;
  j["source_digest"] = collection.source_digest;
  j["output_digest"] = std::string(output_digest);
  j["count"] = collection.size();
  return j;
}

}  // namespace expertsynth
