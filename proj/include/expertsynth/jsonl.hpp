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

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace expertsynth {

// Insertion-ordered: keys are emitted in the order they were set.
using Json = nlohmann::ordered_json;

// Compact single-line dump; invalid UTF-8 is replaced rather than thrown.
std::string dump_line(const Json& value);

std::string read_file(const std::filesystem::path& path);

// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

void write_jsonl_atomic(const std::filesystem::path& path, const std::vector<Json>& records);

// Parses one JSON value per non-blank line. `on_record` gets the 1-based
// line number. Malformed JSON raises kParse with that line.
void for_each_jsonl(std::string_view content,
                    const std::function<void(const Json&, std::size_t line)>& on_record);

std::vector<Json> read_jsonl(const std::filesystem::path& path);

}  // namespace expertsynth
