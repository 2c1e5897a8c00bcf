#pragma once

#include <map>
#include <memory>
#include <string>

#include "infrisk/service/config.hpp"
#include "infrisk/service/game.hpp"
#include "infrisk/service/registry.hpp"

namespace infrisk::service {

struct ApiRequest {
  std::string method;
  std::string path;  // without query string
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lower-case names
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Routes under /api/v1. Thread-safe; transport independent.
///
///   GET  /api/v1/health
///   GET  /api/v1/schemas                      GET /api/v1/schemas/{id}
///   POST /api/v1/assess/{schema-id}           body: AnswerSet
///   POST /api/v1/calibrate/{schema-id}        body: text/csv, ?ridge=<lambda>
///   GET  /api/v1/models/{schema-id}
///   POST /api/v1/models/{schema-id}/activate/{version}
///   POST /api/v1/game                         body: AnswerSet
///   GET  /api/v1/game/{session}
///   POST /api/v1/game/{session}/guess         body: {"probability"?, "band"?}
///
/// Errors are {"code", "message", "details": []}.
class Api {
 public:
  Api(ModelRegistry& registry, ServiceConfig config);

  ApiResponse handle(const ApiRequest& request);

  const ServiceConfig& config() const noexcept { return config_; }

 private:
  ApiResponse route(const ApiRequest& request);

  ModelRegistry& registry_;
  ServiceConfig config_;
  GameStore games_;
};

/// HTTP/1.1 listener around an Api.
class HttpServer {
 public:
  explicit HttpServer(Api& api);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds host:port; port 0 picks a free port. Returns the bound port.
  /// Throws Error(io) on failure.
  int bind(const std::string& host, int port);

  /// Blocks until stop().
  void run();
  /// Returns once run() is accepting connections.
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace infrisk::service
