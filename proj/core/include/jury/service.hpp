// Copyright 2026 The JuryLearn Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef JURY_SERVICE_HPP_
#define JURY_SERVICE_HPP_

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "jury/dataset.hpp"
#include "jury/jury.hpp"
#include "jury/model.hpp"

namespace jury {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path checkpoint;
  std::optional<DatasetPaths> dataset;
  VerdictConfig default_verdict;
  std::size_t max_trials = 1000;
  int request_timeout_seconds = 30;
  std::size_t threads = 1;  // per-request worker threads

  void Validate() const;
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON, keys sorted
};

// JSON API under /v1:
//   GET  /v1/health
//   GET  /v1/schema
//   POST /v1/verdict
//   POST /v1/counterfactual
//   POST /v1/conditional/resolve
//   GET  /v1/juror/{annotator_id}
// Errors are {"code", "message", "detail"}. Request handling only reads the
// loaded state, so concurrent requests are safe.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  // Reads config.checkpoint and config.dataset.
  void Load();
  void Attach(JuryModel model, Dataset dataset);
  bool ready() const;

  HttpResponse Handle(std::string_view method, std::string_view path,
                      std::string_view body) const;

  // Binds the configured address and returns the bound port.
  int Bind();
  // Blocks serving requests until Stop(); Bind() first.
  void Listen();
  void Stop();

  const ServiceConfig& config() const { return config_; }

 private:
  struct State;
  struct Http;

  std::shared_ptr<const State> state() const;

  ServiceConfig config_;
  mutable std::mutex mu_;
  std::shared_ptr<const State> state_;
  std::unique_ptr<Http> http_;
};

}  // namespace jury

#endif  // JURY_SERVICE_HPP_
