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

#include "jury/service.hpp"

#include <atomic>
#include <cstdio>
#include <iostream>
#include <random>

#include "httplib.h"
#include "jury/error.hpp"
#include "jury/json_io.hpp"

namespace jury {

namespace {

constexpr std::string_view kPrefix = "/v1";
constexpr std::size_t kDefaultKBest = 5;

struct HttpError {
  int status;
  std::string code;
  std::string message;
  std::string detail;
};

HttpResponse Reply(int status, const Json& body) { return {status, body.dump()}; }

HttpResponse ErrorReply(const HttpError& e) {
  return Reply(e.status, Json{{"code", e.code}, {"message", e.message}, {"detail", e.detail}});
}

int StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownAttribute:
    case ErrorCode::kUnknownValue:
      return 422;
    case ErrorCode::kUnknownAnnotator:
      return 404;
    case ErrorCode::kInfeasible:
      return 409;
    case ErrorCode::kIoError:
    case ErrorCode::kCorruptCheckpoint:
    case ErrorCode::kVersionMismatch:
    case ErrorCode::kNonFiniteLoss:
      return 500;
    default:
      return 400;
  }
}

std::uint64_t FreshSeed() {
  static std::atomic<std::uint64_t> counter{0};
  std::random_device rd;
  const std::uint64_t mixed = SplitMix64((std::uint64_t(rd()) << 32) ^ rd() ^ counter++);
  return mixed & ((std::uint64_t(1) << 53) - 1);  // exact in JSON consumers
}

Json ParseBody(std::string_view body) {
  if (body.empty()) throw Error(ErrorCode::kInvalidArgument, "request body is empty");
  try {
    return Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, "request body is not valid JSON", e.what());
  }
}

}  // namespace

void ServiceConfig::Validate() const {
  if (max_trials < default_verdict.n_trials) {
    throw Error(ErrorCode::kInvalidArgument, "max_trials is below the default n_trials");
  }
  if (port < 0 || port > 65535) throw Error(ErrorCode::kInvalidArgument, "port out of range");
  if (request_timeout_seconds < 1) {
    throw Error(ErrorCode::kInvalidArgument, "request timeout must be at least 1 second");
  }
  default_verdict.Validate();
}

struct Service::State {
  JuryModel model;
  Dataset dataset;
};

struct Service::Http {
  httplib::Server server;
};

Service::Service(ServiceConfig config) : config_(std::move(config)) { config_.Validate(); }

Service::~Service() = default;

void Service::Load() {
  if (!config_.dataset) throw Error(ErrorCode::kInvalidArgument, "no dataset configured");
  JuryModel model = LoadCheckpoint(config_.checkpoint);
  Dataset dataset = LoadDataset(*config_.dataset);
  Attach(std::move(model), std::move(dataset));
}

void Service::Attach(JuryModel model, Dataset dataset) {
  auto s = std::make_shared<State>(State{std::move(model), std::move(dataset)});
  std::lock_guard<std::mutex> lock(mu_);
  state_ = std::move(s);
}

std::shared_ptr<const Service::State> Service::state() const {
  std::lock_guard<std::mutex> lock(mu_);
  return state_;
}

bool Service::ready() const { return state() != nullptr; }

namespace {

// Endpoint bodies; each may throw jury::Error or HttpError.
class Handlers {
 public:
  Handlers(const JuryModel& model, const Dataset& dataset, const ServiceConfig& config)
      : model_(model), dataset_(dataset), config_(config) {}

  Json Schema() const { return SchemaToJson(dataset_); }

  Json Verdict(const Json& req) const {
    RejectUnknownKeys(req, {"composition", "item_text", "item_id", "item_embedding",
                            "verdict_config", "trends"},
                      "verdict request");
    const JuryComposition composition = ParseComposition(Require(req, "composition"));
    const Item item = ItemOf(req);
    VerdictConfig vc = config_.default_verdict;
    vc.seed = FreshSeed();
    vc.threads = config_.threads;
    if (auto it = req.find("verdict_config"); it != req.end()) vc = ParseVerdictConfig(*it, vc);
    if (vc.n_trials > config_.max_trials) {
      throw Error(ErrorCode::kInvalidArgument, "n_trials exceeds the server maximum",
                  "max=" + std::to_string(config_.max_trials));
    }
    std::vector<std::string> trend_keys{"sheet"};
    if (auto it = req.find("trends"); it != req.end()) {
      if (!it->is_array()) throw Error(ErrorCode::kInvalidArgument, "'trends' must be an array");
      trend_keys.clear();
      for (const auto& k : *it) {
        if (!k.is_string()) throw Error(ErrorCode::kInvalidArgument, "'trends' entries must be strings");
        trend_keys.push_back(k.get<std::string>());
      }
    }
    const jury::Verdict verdict = JuryVerdict(model_, dataset_, composition, item, vc);
    Json out = VerdictToJson(verdict, dataset_);
    out["composition"] = CompositionToJson(composition);
    Json trends = Json::object();
    for (const auto& key : trend_keys) {
      trends[key] = TrendsToJson(ComputeJuryTrends(model_, dataset_, composition, item, verdict, key));
    }
    out["trends"] = std::move(trends);
    return out;
  }

  // Returns the table; an infeasible search raises Infeasible carrying the
  // reason so the caller answers 409.
  Json Counterfactual(const Json& req) const {
    RejectUnknownKeys(req, {"composition", "item_text", "item_id", "item_embedding", "k_best",
                            "strict", "threshold"},
                      "counterfactual request");
    const JuryComposition composition = ParseComposition(Require(req, "composition"));
    ValidateComposition(dataset_, composition);
    const Item item = ItemOf(req);
    CounterfactualTableOptions options;
    options.threads = config_.threads;
    std::size_t k_best = kDefaultKBest;
    if (auto it = req.find("k_best"); it != req.end()) {
      if (!it->is_number_integer() || it->get<long long>() < 1 || it->get<long long>() > 100) {
        throw Error(ErrorCode::kInvalidArgument, "'k_best' must be an integer in [1, 100]");
      }
      k_best = it->get<std::size_t>();
    }
    if (auto it = req.find("strict"); it != req.end()) {
      if (!it->is_boolean()) throw Error(ErrorCode::kInvalidArgument, "'strict' must be a boolean");
      options.solver.strict = it->get<bool>();
    }
    if (auto it = req.find("threshold"); it != req.end()) {
      if (!it->is_number()) throw Error(ErrorCode::kInvalidArgument, "'threshold' must be a number");
      options.solver.threshold = it->get<double>();
    }
    const auto table =
        ComputeCounterfactualTable(model_, dataset_, composition, item, k_best, options);
    if (table.infeasible_reason) {
      throw Error(ErrorCode::kInfeasible, *table.infeasible_reason,
                  "v_before=" + std::to_string(JuryValue(table.scores, table.current)));
    }
    return CounterfactualTableToJson(table, options.solver.threshold);
  }

  Json Resolve(const Json& req) const {
    RejectUnknownKeys(req, {"policy", "item_text", "item_id", "item_embedding"},
                      "conditional request");
    const ConditionalJuryPolicy policy = ParsePolicy(Require(req, "policy"));
    const Item item = ItemOf(req);
    const ContentEncoder* encoder =
        model_.encoder().has_parameters() ? &model_.encoder() : nullptr;
    const JuryComposition composition = ResolveComposition(policy, item, encoder);
    return Json{{"composition", CompositionToJson(composition)},
                {"trace", TraceToJson(ExplainResolution(policy, item, encoder))}};
  }

  Json Juror(const std::string& id) const {
    return JurorDetailsToJson(GetJurorDetails(model_, dataset_, id));
  }

 private:
  static const Json& Require(const Json& req, const char* key) {
    auto it = req.find(key);
    if (it == req.end()) {
      throw Error(ErrorCode::kInvalidArgument, std::string("request is missing '") + key + "'");
    }
    return *it;
  }

  Item ItemOf(const Json& req) const {
    const bool has_text = req.contains("item_text");
    const bool has_id = req.contains("item_id");
    if (has_text == has_id) {
      throw Error(ErrorCode::kInvalidArgument, "give exactly one of 'item_text' or 'item_id'");
    }
    if (has_id) {
      if (!req["item_id"].is_string()) throw Error(ErrorCode::kInvalidArgument, "'item_id' must be a string");
      const auto id = req["item_id"].get<std::string>();
      const auto index = dataset_.FindItem(id);
      if (!index) throw Error(ErrorCode::kInvalidArgument, "unknown item_id", id);
      return dataset_.item(*index);
    }
    if (!req["item_text"].is_string()) throw Error(ErrorCode::kInvalidArgument, "'item_text' must be a string");
    Item item{"", req["item_text"].get<std::string>(), std::nullopt};
    if (auto it = req.find("item_embedding"); it != req.end()) {
      try {
        item.embedding = it->get<std::vector<double>>();
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::kInvalidArgument, "'item_embedding' must be an array of numbers");
      }
    }
    return item;
  }

  const JuryModel& model_;
  const Dataset& dataset_;
  const ServiceConfig& config_;
};

}  // namespace

HttpResponse Service::Handle(std::string_view method, std::string_view path,
                             std::string_view body) const {
  if (const auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  if (path.substr(0, kPrefix.size()) != kPrefix) {
    return ErrorReply({404, "NotFound", "no such endpoint", std::string(path)});
  }
  const std::string route(path.substr(kPrefix.size()));
  const bool get = method == "GET";
  const bool post = method == "POST";
  auto method_not_allowed = [&] {
    return ErrorReply({405, "MethodNotAllowed", "method not allowed", std::string(method)});
  };

  if (route == "/health") {
    if (!get) return method_not_allowed();
    return Reply(200, Json{{"status", ready() ? "ok" : "loading"}});
  }
  const bool known = route == "/schema" || route == "/verdict" || route == "/counterfactual" ||
                     route == "/conditional/resolve" || route.rfind("/juror/", 0) == 0;
  if (!known) return ErrorReply({404, "NotFound", "no such endpoint", std::string(path)});

  const auto s = state();
  if (!s) return ErrorReply({503, "NotReady", "model and dataset are not loaded", ""});
  const Handlers h(s->model, s->dataset, config_);
  try {
    if (route == "/schema") {
      if (!get) return method_not_allowed();
      return Reply(200, h.Schema());
    }
    if (route.rfind("/juror/", 0) == 0) {
      if (!get) return method_not_allowed();
      const std::string id = httplib::detail::decode_url(route.substr(7), false);
      return Reply(200, h.Juror(id));
    }
    if (!post) return method_not_allowed();
    const Json req = ParseBody(body);
    if (!req.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be an object");
    if (route == "/verdict") return Reply(200, h.Verdict(req));
    if (route == "/counterfactual") return Reply(200, h.Counterfactual(req));
    return Reply(200, h.Resolve(req));
  } catch (const Error& e) {
    return ErrorReply({StatusFor(e.code()), std::string(ErrorCodeName(e.code())), e.what(), e.detail()});
  } catch (const std::exception& e) {
    char id[17];
    std::snprintf(id, sizeof(id), "%016llx", static_cast<unsigned long long>(FreshSeed()));
    std::cerr << "internal error " << id << ": " << e.what() << '\n';
    return ErrorReply({500, "Internal", "internal error", std::string("id=") + id});
  }
}

int Service::Bind() {
  http_ = std::make_unique<Http>();
  auto& svr = http_->server;
  svr.set_read_timeout(config_.request_timeout_seconds, 0);
  svr.set_write_timeout(config_.request_timeout_seconds, 0);
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const HttpResponse r = Handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body, "application/json");
  };
  svr.Get(".*", route);
  svr.Post(".*", route);
  svr.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  const int port = config_.port == 0 ? svr.bind_to_any_port(config_.host)
                                     : (svr.bind_to_port(config_.host, config_.port) ? config_.port : -1);
  if (port < 0) {
    throw Error(ErrorCode::kIoError, "cannot bind",
                config_.host + ":" + std::to_string(config_.port));
  }
  return port;
}

void Service::Listen() {
  if (!http_) throw Error(ErrorCode::kInvalidArgument, "Bind() must be called before Listen()");
  http_->server.listen_after_bind();
}

void Service::Stop() {
  if (http_) http_->server.stop();
}

}  // namespace jury
