#include "infrisk/service/server.hpp"

#include <sys/socket.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <thread>
#include <vector>

#include <httplib.h>

#include "infrisk/calibration/cohort.hpp"
#include "infrisk/calibration/fit.hpp"
#include "infrisk/engine.hpp"
#include "infrisk/error.hpp"

namespace infrisk::service {

namespace {

struct HttpError {
  int status;
  Error error;
};

ApiResponse json_response(int status, const nlohmann::json& doc) {
  return {status, "application/json", doc.dump() + "\n"};
}

ApiResponse error_response(int status, const Error& e) {
  return json_response(status, {{"code", std::string(to_string(e.code()))},
                                {"message", e.what()},
                                {"details", e.details()}});
}

int default_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::validation:
    case ErrorCode::parse:
    case ErrorCode::schema_mismatch: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::conflict: return 409;
    case ErrorCode::degenerate_design: return 422;
    case ErrorCode::configuration:
    case ErrorCode::io: return 500;
  }
  return 500;
}

[[noreturn]] void fail(int status, ErrorCode code, const std::string& message,
                       std::vector<std::string> details = {}) {
  throw HttpError{status, Error(code, message, std::move(details))};
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    const auto j = path.find('/', i);
    const auto end = j == std::string::npos ? path.size() : j;
    if (end > i) out.push_back(path.substr(i, end - i));
    i = end;
  }
  return out;
}

nlohmann::json parse_json_body(const std::string& body) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    fail(400, ErrorCode::parse, std::string("request body is not valid JSON: ") + e.what());
  }
}

bool tokens_equal(const std::string& given, const std::string& expected) {
  if (given.size() != expected.size() || expected.empty()) return false;
  unsigned char diff = 0;
  for (std::size_t i = 0; i < given.size(); ++i) diff |= static_cast<unsigned char>(given[i] ^ expected[i]);
  return diff == 0;
}

int parse_version(const std::string& text) {
  int v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || end != text.data() + text.size() || v < 1) {
    fail(400, ErrorCode::validation, "model version must be a positive integer, got '" + text + "'");
  }
  return v;
}

}  // namespace

Api::Api(ModelRegistry& registry, ServiceConfig config)
    : registry_(registry), config_(std::move(config)), games_(config_.game_ttl) {}

ApiResponse Api::handle(const ApiRequest& request) {
  try {
    return route(request);
  } catch (const HttpError& e) {
    return error_response(e.status, e.error);
  } catch (const Error& e) {
    return error_response(default_status(e.code()), e);
  } catch (const std::exception& e) {
    return error_response(500, Error(ErrorCode::io, std::string("internal error: ") + e.what()));
  }
}

ApiResponse Api::route(const ApiRequest& req) {
  const auto seg = split_path(req.path);
  const bool get = req.method == "GET";
  const bool post = req.method == "POST";
  if (seg.size() < 3 || seg[0] != "api" || seg[1] != "v1") {
    fail(404, ErrorCode::not_found, "no route for " + req.path);
  }
  const std::string& resource = seg[2];
  const std::size_t n = seg.size();

  auto method_check = [&](bool ok) {
    if (!ok) fail(405, ErrorCode::validation, req.method + " not allowed on " + req.path);
  };
  auto schema_or_404 = [&](const std::string& id) {
    auto s = registry_.schemas().find(id);
    if (!s) fail(404, ErrorCode::not_found, "unknown schema '" + id + "'");
    return s;
  };
  auto require_token = [&] {
    if (config_.bearer_token.empty()) {
      fail(401, ErrorCode::validation, "privileged endpoints are disabled: no bearer token configured");
    }
    auto it = req.headers.find("authorization");
    const std::string prefix = "Bearer ";
    if (it == req.headers.end() || it->second.rfind(prefix, 0) != 0 ||
        !tokens_equal(it->second.substr(prefix.size()), config_.bearer_token)) {
      fail(401, ErrorCode::validation, "missing or invalid bearer token");
    }
  };
  auto answers_from_body = [&](const std::string& path_schema) {
    AnswerSet a = answer_set_from_json(parse_json_body(req.body));
    if (!path_schema.empty()) {
      if (!a.schema_id.empty() && a.schema_id != path_schema) {
        fail(400, ErrorCode::validation,
             "answer set is for schema '" + a.schema_id + "', not '" + path_schema + "'");
      }
      a.schema_id = path_schema;
    } else if (a.schema_id.empty()) {
      fail(400, ErrorCode::validation, "answer set needs a schema_id");
    }
    return a;
  };
  auto active_or_409 = [&](const std::string& id) {
    auto m = registry_.active(id);
    if (!m) fail(409, ErrorCode::conflict, "schema '" + id + "' has no active model");
    return m;
  };

  if (resource == "health" && n == 3) {
    method_check(get);
    return json_response(200, {{"status", "ok"}});
  }

  if (resource == "schemas") {
    method_check(get);
    if (n == 3) {
      nlohmann::json list = nlohmann::json::array();
      for (const auto& id : registry_.schemas().ids()) list.push_back(schema_to_json(*registry_.schemas().find(id)));
      return json_response(200, {{"schemas", list}});
    }
    if (n == 4) return {200, "application/json", serialize_schema(*schema_or_404(seg[3]))};
  }

  if (resource == "assess" && n == 4) {
    method_check(post);
    auto schema = schema_or_404(seg[3]);
    const AnswerSet answers = answers_from_body(seg[3]);
    auto model = active_or_409(seg[3]);
    return {200, "application/json", assessment_body(assess(*schema, model->model, answers))};
  }

  if (resource == "calibrate" && n == 4) {
    method_check(post);
    require_token();
    auto schema = schema_or_404(seg[3]);
    if (schema->model_kind != ModelKind::logistic) {
      fail(400, ErrorCode::validation, "schema '" + seg[3] + "' is not backed by a logistic model");
    }
    FitConfig cfg;
    if (auto it = req.query.find("ridge"); it != req.query.end()) {
      double lambda = 0.0;
      const auto& t = it->second;
      auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), lambda);
      if (ec != std::errc{} || end != t.data() + t.size() || !(lambda >= 0.0)) {
        fail(400, ErrorCode::validation, "ridge must be a nonnegative number, got '" + t + "'");
      }
      cfg.ridge_lambda = lambda;
    }
    IngestResult ingested;
    FitReport report;
    try {
      ingested = ingest_cohort_csv(req.body, *schema, {}, "uploaded CSV");
      report = fit_logistic(ingested.dataset, cfg);
    } catch (const Error& e) {
      fail(422, e.code(), e.what(), e.details());
    }
    if (cfg.ridge_lambda == 0.0 && report.penalty_used > 0.0) {
      fail(422, ErrorCode::validation,
           "unpenalized fit did not converge (quasi-separation or singular design); retry with ?ridge=<lambda>");
    }
    if (!report.converged) {
      fail(422, ErrorCode::validation, "fit did not converge within the iteration limit");
    }
    RiskModel model{report.coefficients};
    const int version = registry_.add_version(model);
    report.coefficients.version = version;
    auto doc = fit_report_to_json(report);
    doc["fit_diagnostics"]["warnings"] = ingested.warnings;
    return json_response(201, doc);
  }

  if (resource == "models" && n >= 4) {
    const std::string& id = seg[3];
    schema_or_404(id);
    if (n == 4) {
      method_check(get);
      auto a = registry_.active(id);
      return json_response(200, {{"schema_id", id},
                                 {"versions", registry_.versions(id)},
                                 {"active", a ? nlohmann::json(a->version) : nlohmann::json(nullptr)}});
    }
    if (n == 6 && seg[4] == "activate") {
      method_check(post);
      require_token();
      const int version = parse_version(seg[5]);
      try {
        registry_.activate(id, version);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::schema_mismatch) fail(409, e.code(), e.what(), e.details());
        throw;
      }
      return json_response(200, {{"schema_id", id}, {"active", version}});
    }
  }

  if (resource == "game") {
    if (n == 3) {
      method_check(post);
      const AnswerSet answers = answers_from_body({});
      auto schema = schema_or_404(answers.schema_id);
      auto model = active_or_409(answers.schema_id);
      const AnswerSet validated = validate_answers(*schema, answers);
      auto actual = assess(*schema, model->model, validated);
      return json_response(201, games_.create(answers.schema_id, validated, std::move(actual), schema->bands));
    }
    if (n == 4) {
      method_check(get);
      return json_response(200, games_.view(seg[3]));
    }
    if (n == 5 && seg[4] == "guess") {
      method_check(post);
      return json_response(200, games_.guess(seg[3], guess_from_json(parse_json_body(req.body))));
    }
  }

  fail(404, ErrorCode::not_found, "no route for " + req.path);
}

struct HttpServer::Impl {
  Api& api;
  httplib::Server server;
  bool bound = false;
  std::atomic<bool> ran{false};

  explicit Impl(Api& a) : api(a) {}
};

HttpServer::HttpServer(Api& api) : impl_(std::make_unique<Impl>(api)) {
  auto& svr = impl_->server;
  const std::string origin = api.config().cors_origin;
  auto cors = [origin](httplib::Response& res) {
    if (origin.empty()) return;
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Authorization");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
  };
  auto handler = [this, cors](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r;
    r.method = req.method;
    r.path = req.path;
    r.body = req.body;
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    for (const auto& [k, v] : req.headers) {
      std::string key = k;
      std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
      r.headers.emplace(std::move(key), v);
    }
    const ApiResponse out = impl_->api.handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
    cors(res);
  };
  svr.Get(".*", handler);
  svr.Post(".*", handler);
  svr.Put(".*", handler);
  svr.Delete(".*", handler);
  svr.Options(".*", [cors](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    cors(res);
  });
  // httplib defaults to SO_REUSEPORT, which lets a second process bind the
  // same port and silently take a share of the connections.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  svr.set_payload_max_length(64u << 20);
  if (!api.config().static_dir.empty()) {
    if (!svr.set_mount_point("/", api.config().static_dir.string())) {
      throw Error(ErrorCode::configuration, "static directory not found: " + api.config().static_dir.string());
    }
  }
}

HttpServer::~HttpServer() {
  auto& svr = impl_->server;
  if (impl_->bound && !impl_->ran) {
    // httplib only releases the listening socket when a listen loop ends.
    std::thread loop([&svr] { svr.listen_after_bind(); });
    svr.wait_until_ready();
    svr.stop();
    loop.join();
    return;
  }
  stop();
}

int HttpServer::bind(const std::string& host, int port) {
  auto& svr = impl_->server;
  if (port == 0) {
    const int p = svr.bind_to_any_port(host);
    if (p <= 0) throw Error(ErrorCode::io, "cannot bind " + host);
    impl_->bound = true;
    return p;
  }
  if (!svr.bind_to_port(host, port)) {
    throw Error(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return port;
}

void HttpServer::run() {
  impl_->ran = true;
  impl_->server.listen_after_bind();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace infrisk::service
