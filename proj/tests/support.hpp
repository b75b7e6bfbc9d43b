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
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "expertsynth/backend.hpp"
#include "expertsynth/clock.hpp"
#include "expertsynth/gateway.hpp"
#include "expertsynth/hashing.hpp"
#include "expertsynth/jsonl.hpp"
#include "expertsynth/run_config.hpp"
#include "expertsynth/transport.hpp"

namespace expertsynth::testing {

namespace fs = std::filesystem;

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("expertsynth-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string chat_reply(const std::string& text) {
  return Json{{"choices", Json::array({Json{{"message", {{"role", "assistant"},
                                                        {"content", text}}}}})}}
      .dump();
}

// Replies from a fixed script, in order; records every request. Running past
// the end of the script yields status 0 (no response).
class ScriptedTransport final : public Transport {
 public:
  explicit ScriptedTransport(std::vector<HttpResponse> script)
      : script_(script.begin(), script.end()) {}
  HttpResponse post(const HttpRequest& request) override {
    std::lock_guard lock(mu_);
    requests_.push_back(request);
    if (script_.empty()) return {0, "", "script exhausted"};
    auto r = script_.front();
    script_.pop_front();
    return r;
  }
  std::vector<HttpRequest> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }

 private:
  mutable std::mutex mu_;
  std::deque<HttpResponse> script_;
  std::vector<HttpRequest> requests_;
};

// Generation transport whose judge replies are pinned per rubric; non-judge
// prompts get `default_reply`. Records every system prompt seen on the wire.
class PinnedJudgeTransport final : public Transport {
 public:
  std::string difficulty_reply = "7";
  std::string feasibility_reply = "9";
  std::string quality_reply = "8";
  std::string default_reply = "ok";

  HttpResponse post(const HttpRequest& request) override {
    const auto body = Json::parse(request.body);
    std::string system;
    for (const auto& m : body.at("messages")) {
      if (m.at("role") == "system") system = m.at("content").get<std::string>();
    }
    std::lock_guard lock(mu_);
    system_prompts_.push_back(system);
    std::string reply = default_reply;
    if (system.find("difficulty score") != std::string::npos) reply = difficulty_reply;
    if (system.find("realism score") != std::string::npos) reply = feasibility_reply;
    if (system.find("quality score") != std::string::npos) reply = quality_reply;
    return {200, chat_reply(reply), ""};
  }
  std::vector<std::string> system_prompts() const {
    std::lock_guard lock(mu_);
    return system_prompts_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::string> system_prompts_;
};

// Wraps another transport and answers `status` to any request whose body
// contains `marker`.
class FaultInjectingTransport final : public Transport {
 public:
  FaultInjectingTransport(std::shared_ptr<Transport> inner, std::string marker, int status = 500)
      : inner_(std::move(inner)), marker_(std::move(marker)), status_(status) {}
  HttpResponse post(const HttpRequest& request) override {
    if (!marker_.empty() && request.body.find(marker_) != std::string::npos) {
      ++faults_;
      return {status_, "{\"error\":\"injected\"}", ""};
    }
    return inner_->post(request);
  }
  std::size_t faults() const { return faults_.load(); }

 private:
  std::shared_ptr<Transport> inner_;
  std::string marker_;
  int status_;
  std::atomic<std::size_t> faults_{0};
};

inline BackendConfig mock_config(BackendKind kind, const std::string& name = "test") {
  BackendConfig c;
  c.kind = kind;
  c.endpoint = "mock://" + name;
  c.model_name = name + "-model";
  c.requests_per_minute = 1e9;
  return c;
}

inline std::shared_ptr<Gateway> make_gateway(BackendKind kind, std::shared_ptr<Transport> t,
                                             const std::string& name = "test",
                                             std::size_t max_in_flight = 4) {
  return std::make_shared<Gateway>(mock_config(kind, name), std::move(t),
                                   std::make_shared<VirtualClock>(), RetryPolicy{},
                                   max_in_flight);
}

// One MockTransport per endpoint, kept so tests can read call counters across
// several pipeline invocations.
class MockWorld {
 public:
  explicit MockWorld(MockOptions options = {}) : options_(options) {}

  TransportFactory factory() {
    return [this](const BackendConfig& cfg) -> TransportBinding {
      std::lock_guard lock(mu_);
      auto& t = transports_[cfg.endpoint];
      if (!t) t = std::make_shared<MockTransport>(options_);
      std::shared_ptr<Transport> wire = t;
      if (auto it = faults_.find(cfg.endpoint); it != faults_.end()) {
        wire = std::make_shared<FaultInjectingTransport>(t, it->second);
      }
      return {wire, std::make_shared<VirtualClock>()};
    };
  }

  // Subsequent factory calls for `endpoint` fail requests containing `marker`.
  void inject_fault(const std::string& endpoint, const std::string& marker) {
    faults_[endpoint] = marker;
  }

  std::shared_ptr<MockTransport> transport(const std::string& endpoint) {
    std::lock_guard lock(mu_);
    auto& t = transports_[endpoint];
    if (!t) t = std::make_shared<MockTransport>(options_);
    return t;
  }

 private:
  MockOptions options_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<MockTransport>> transports_;
  std::map<std::string, std::string> faults_;
};

// Synthetic personas: long enough for any default filter, unique ids and
// texts, with a domain tag.
inline std::string persona_corpus(std::size_t n, const std::string& prefix = "p") {
  static const char* fields[] = {"cardiology", "tax law", "compiler design", "marine biology",
                                 "structural engineering", "medieval history",
                                 "quantum chemistry", "supply chain logistics",
                                 "pediatric nursing", "cryptography"};
  static const char* roles[] = {"researcher", "practitioner", "professor", "consultant",
                                "senior engineer"};
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    Json j{{"id", prefix + std::to_string(i)},
           {"text", std::string("A ") + roles[i % 5] + " specialising in " + fields[i % 10] +
                        " with " + std::to_string(5 + i) +
                        " years of experience, working on case " + std::to_string(i) + "."},
           {"domain", fields[i % 10]}};
    out += dump_line(j) + "\n";
  }
  return out;
}

}  // namespace expertsynth::testing
