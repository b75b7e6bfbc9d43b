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


#include <array>
#include <cctype>
#include <cmath>
#include <string>

#include "expertsynth/hashing.hpp"
#include "expertsynth/jsonl.hpp"
#include "expertsynth/transport.hpp"

namespace expertsynth {
namespace {

constexpr std::array<std::string_view, 48> kVocabulary = {
    "analysis",  "protocol",   "mechanism", "evidence",    "tradeoff",   "regulatory",
    "clinical",  "structural", "model",     "assumption",  "variance",   "boundary",
    "thermal",   "statute",    "precedent", "enzyme",      "pathway",    "latency",
    "tolerance", "framework",  "dataset",   "calibration", "hypothesis", "mitigation",
    "the",       "of",         "and",       "in",          "with",       "under",
    "which",     "therefore",  "because",   "each",        "should",     "must",
    "compare",   "derive",     "evaluate",  "explain",     "quantify",   "justify",
    "risk",      "cost",       "failure",   "yield",       "stress",     "signal"};

std::string mock_text(std::uint64_t seed) {
  Rng rng(seed);
  const auto words = 24 + rng.uniform_below(48);
  std::string text;
  for (std::uint64_t i = 0; i < words; ++i) {
    if (i > 0) text.push_back(i % 12 == 0 ? '\n' : ' ');
    text.append(kVocabulary[rng.uniform_below(kVocabulary.size())]);
  }
  text.push_back('.');
  return text;
}

std::size_t count_words(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

HttpResponse ok(const Json& body) { return HttpResponse{200, dump_line(body), {}}; }

HttpResponse bad_request(std::string message) {
  return HttpResponse{400, dump_line(Json{{"error", message}}), {}};
}

}  // namespace

std::vector<double> MockTransport::mock_embedding(std::string_view model, std::string_view text,
                                                  std::size_t dim) {
  std::string material(model);
  material.push_back('\x1f');
  material.append(text);
  Rng rng(hash64(material));
  std::vector<double> values(dim);
  double norm = 0.0;
  for (auto& v : values) {
    v = 2.0 * rng.uniform01() - 1.0;
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (auto& v : values) v /= norm;
  return values;
}

double MockTransport::mock_reward(std::string_view instruction, std::string_view response) {
  std::string material(instruction);
  material.push_back('\x1f');
  material.append(response);
  return static_cast<double>(hash64(material) >> 11) * 0x1.0p-53 * 10.0 - 5.0;
}

HttpResponse MockTransport::post(const HttpRequest& request) {
  Json body;
  try {
    body = Json::parse(request.body);
  } catch (const Json::parse_error&) {
    return bad_request("body is not JSON");
  }
  if (!body.is_object()) return bad_request("body is not an object");
  const std::string model = body.value("model", std::string("mock"));

  if (body.contains("messages")) {
    std::string system, user;
    for (const auto& m : body["messages"]) {
      const auto role = m.value("role", std::string());
      if (role == "system") system = m.value("content", std::string());
      if (role == "user") user = m.value("content", std::string());
    }
    if (user.empty()) return bad_request("missing user message");
    std::string reply;
    if (system.rfind("You are an expert evaluator", 0) == 0) {
      ++judge_calls_;
      reply = std::to_string(4 + hash64(system + '\x1f' + user) % 7);
    } else {
      ++generation_calls_;
      const double temperature = body.value("temperature", 0.0);
      std::uint64_t variant = 0;
      if (temperature > 0 && body.contains("seed") && options_.response_variants > 1) {
        Rng rng(hash64(user) ^ body["seed"].get<std::uint64_t>());
        variant = rng.uniform_below(options_.response_variants);
      }
      reply = mock_text(hash64(model + '\x1f' + system + '\x1f' + user + '\x1f' +
                               std::to_string(variant)));
    }
    Json out;
    out["choices"] = Json::array({Json{{"index", 0},
                                       {"message", {{"role", "assistant"}, {"content", reply}}},
                                       {"finish_reason", "stop"}}});
    out["usage"] = Json{{"prompt_tokens", count_words(system) + count_words(user)},
                        {"completion_tokens", count_words(reply)}};
    return ok(out);
  }
  if (body.contains("input")) {
    ++embedding_calls_;
    if (!body["input"].is_string()) return bad_request("input must be a string");
    const auto values =
        mock_embedding(model, body["input"].get<std::string>(), options_.embedding_dim);
    Json out;
    out["data"] = Json::array({Json{{"index", 0}, {"embedding", values}}});
    return ok(out);
  }
  if (body.contains("instruction") && body.contains("response")) {
    ++reward_calls_;
    if (!body["instruction"].is_string() || !body["response"].is_string()) {
      return bad_request("instruction and response must be strings");
    }
    return ok(Json{{"score", mock_reward(body["instruction"].get<std::string>(),
                                         body["response"].get<std::string>())}});
  }
  return bad_request("unrecognized request shape");
}

}  // namespace expertsynth
