#include <gtest/gtest.h>

#include <atomic>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "infrisk/engine.hpp"
#include "infrisk/error.hpp"
#include "infrisk/probability.hpp"
#include "infrisk/service/server.hpp"
#include "support.hpp"

using namespace infrisk;
using namespace infrisk::service;
namespace t = infrisk::testing;

namespace {

constexpr const char* kToken = "s3cret-token";

SchemaCatalog catalog() {
  auto c = SchemaCatalog::load_directory(t::source_dir() / "schemas");
  c.add(load_schema_file(t::fixture("synthetic-binary.json")));
  return c;
}

std::string binary_cohort_csv(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::ostringstream out;
  out << "x1,x2,infected\r\n";
  for (std::size_t i = 0; i < n; ++i) {
    const int x1 = t::uniform01(rng) < 0.5, x2 = t::uniform01(rng) < 0.5;
    const double eta = -2.0 + 1.0 * x1 + 0.5 * x1 * x2;
    out << x1 << "," << x2 << "," << (t::uniform01(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0) << "\r\n";
  }
  return out.str();
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override { open(); }

  void open() {
    api.reset();
    registry.reset();
    registry = std::make_unique<ModelRegistry>(dir.path() / "registry", catalog());
    registry->seed_defaults(t::source_dir() / "models");
    ServiceConfig cfg;
    cfg.bearer_token = kToken;
    api = std::make_unique<Api>(*registry, cfg);
  }

  ApiResponse call(const std::string& method, const std::string& path, const std::string& body = {},
                   bool auth = false, std::map<std::string, std::string> query = {}) {
    ApiRequest r;
    r.method = method;
    r.path = path;
    r.body = body;
    r.query = std::move(query);
    if (auth) r.headers["authorization"] = std::string("Bearer ") + kToken;
    return api->handle(r);
  }

  static nlohmann::json json(const ApiResponse& r) { return nlohmann::json::parse(r.body); }

  t::TempDir dir;
  std::unique_ptr<ModelRegistry> registry;
  std::unique_ptr<Api> api;
};

}  // namespace

TEST_F(ServiceTest, ListsShippedSchemas) {
  const auto r = call("GET", "/api/v1/schemas");
  ASSERT_EQ(r.status, 200);
  const auto doc = json(r);
  std::set<std::string> ids;
  for (const auto& s : doc["schemas"]) ids.insert(s["id"].get<std::string>());
  for (const auto& id : t::shipped_schema_ids()) EXPECT_TRUE(ids.count(id)) << id;
}

TEST_F(ServiceTest, SchemaDocumentRoundTrips) {
  for (const auto& id : t::shipped_schema_ids()) {
    const auto r = call("GET", "/api/v1/schemas/" + id);
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(parse_schema(r.body), t::shipped_schema(id));
  }
}

TEST_F(ServiceTest, UnknownSchemaIs404WithErrorBody) {
  const auto r = call("GET", "/api/v1/schemas/nope");
  EXPECT_EQ(r.status, 404);
  const auto doc = json(r);
  EXPECT_EQ(doc["code"], "not_found");
  EXPECT_TRUE(doc["message"].is_string());
  EXPECT_TRUE(doc["details"].is_array());
  EXPECT_EQ(call("GET", "/api/v1/nothing").status, 404);
  EXPECT_EQ(call("DELETE", "/api/v1/schemas").status, 405);
}

TEST_F(ServiceTest, AssessEqualsLibrary) {
  std::mt19937_64 rng(4);
  for (const auto& id : t::shipped_schema_ids()) {
    const auto s = t::shipped_schema(id);
    const auto m = t::shipped_model(id);
    for (int i = 0; i < 20; ++i) {
      const auto a = t::random_answers(s, rng);
      const auto r = call("POST", "/api/v1/assess/" + id, answer_set_to_json(a).dump());
      ASSERT_EQ(r.status, 200) << r.body;
      EXPECT_EQ(r.body, assessment_body(assess(s, m, a)));
    }
  }
}

TEST_F(ServiceTest, AllUncheckedPatientIsSigmoidOfIntercept) {
  const auto s = t::shipped_schema("childbirth-patient");
  nlohmann::json answers = nlohmann::json::object();
  for (const auto& q : s.questions) {
    if (q.widget != Widget::slider) answers[q.id] = false;
  }
  const auto r = call("POST", "/api/v1/assess/childbirth-patient", nlohmann::json{{"answers", answers}}.dump());
  ASSERT_EQ(r.status, 200);
  const double intercept = std::get<LogisticModel>(registry->active("childbirth-patient")->model).intercept;
  EXPECT_EQ(json(r)["probability"].get<double>(), sigmoid(intercept));
}

TEST_F(ServiceTest, AssessResponseCarriesNoCoefficients) {
  const auto r = call("POST", "/api/v1/assess/sti-hiv", R"({"answers":{"contact_type":"receptive_anal"}})");
  ASSERT_EQ(r.status, 200);
  for (const auto& [key, v] : json(r).items()) {
    EXPECT_TRUE(key == "probability" || key == "display" || key == "band" || key == "factor_deltas" ||
                key == "interval")
        << key;
  }
}

TEST_F(ServiceTest, MalformedAnswerIs400NamingQuestion) {
  const auto r = call("POST", "/api/v1/assess/childbirth-hospital", R"({"answers":{"asa_score":"ASA 7"}})");
  EXPECT_EQ(r.status, 400);
  EXPECT_NE(r.body.find("asa_score"), std::string::npos);
  EXPECT_EQ(call("POST", "/api/v1/assess/childbirth-hospital", "{oops").status, 400);
  EXPECT_EQ(call("POST", "/api/v1/assess/childbirth-hospital", R"({"schema_id":"sti-hiv","answers":{}})").status,
            400);
  EXPECT_EQ(call("POST", "/api/v1/assess/unknown", "{}").status, 404);
}

TEST_F(ServiceTest, NoActiveModelIs409) {
  EXPECT_EQ(call("POST", "/api/v1/assess/synthetic-binary", R"({"answers":{}})").status, 409);
}

TEST_F(ServiceTest, CalibrateRequiresToken) {
  EXPECT_EQ(call("POST", "/api/v1/calibrate/synthetic-binary", binary_cohort_csv(100, 1)).status, 401);
  ApiRequest r{"POST", "/api/v1/calibrate/synthetic-binary", {}, {{"authorization", "Bearer wrong"}}, "x"};
  EXPECT_EQ(api->handle(r).status, 401);
  EXPECT_EQ(call("POST", "/api/v1/models/childbirth-patient/activate/1").status, 401);
}

TEST_F(ServiceTest, CalibrateStoresVersionWithoutActivating) {
  const auto r = call("POST", "/api/v1/calibrate/synthetic-binary", binary_cohort_csv(20000, 2), true);
  ASSERT_EQ(r.status, 201) << r.body;
  const auto doc = json(r);
  EXPECT_EQ(doc["fit_diagnostics"]["converged"], true);
  EXPECT_EQ(doc["version"], 1);
  EXPECT_NEAR(doc["intercept"].get<double>(), -2.0, 0.2);
  EXPECT_EQ(registry->versions("synthetic-binary"), std::vector<int>{1});
  EXPECT_EQ(registry->active("synthetic-binary"), nullptr);

  const auto act = call("POST", "/api/v1/models/synthetic-binary/activate/1", {}, true);
  ASSERT_EQ(act.status, 200) << act.body;
  EXPECT_EQ(registry->active("synthetic-binary")->version, 1);
  EXPECT_EQ(call("POST", "/api/v1/assess/synthetic-binary", R"({"answers":{"x1":true}})").status, 200);
  EXPECT_EQ(json(call("GET", "/api/v1/models/synthetic-binary"))["active"], 1);
}

TEST_F(ServiceTest, CalibrationErrorsAre422WithLineNumbers) {
  const auto r = call("POST", "/api/v1/calibrate/synthetic-binary", "x1,x2,infected\n1,0,1\n1,0,9\n", true);
  EXPECT_EQ(r.status, 422);
  EXPECT_NE(r.body.find("line 3"), std::string::npos);
  const auto empty = call("POST", "/api/v1/calibrate/synthetic-binary", "", true);
  EXPECT_EQ(empty.status, 422);
  EXPECT_NE(empty.body.find("no data rows"), std::string::npos);
  const auto separable =
      call("POST", "/api/v1/calibrate/synthetic-binary", t::read_file(t::fixture("separable.csv")), true);
  EXPECT_EQ(separable.status, 422);
  EXPECT_NE(separable.body.find("ridge"), std::string::npos);
  const auto ridged = call("POST", "/api/v1/calibrate/synthetic-binary", t::read_file(t::fixture("separable.csv")),
                           true, {{"ridge", "0.1"}});
  EXPECT_EQ(ridged.status, 201) << ridged.body;
  EXPECT_EQ(call("POST", "/api/v1/calibrate/sti-hiv", "contact_type,infected\n", true).status, 400);
}

TEST_F(ServiceTest, MismatchedActivationIs409) {
  auto m = std::get<LogisticModel>(t::shipped_model("childbirth-patient"));
  m.main_coefs.erase("age_gt_35");
  std::ofstream(dir.path() / "registry" / "childbirth-patient" / "v2.json") << serialize_model(RiskModel{m});
  const auto r = call("POST", "/api/v1/models/childbirth-patient/activate/2", {}, true);
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(registry->active("childbirth-patient")->version, 1);
  EXPECT_EQ(call("POST", "/api/v1/models/childbirth-patient/activate/9", {}, true).status, 404);
  EXPECT_EQ(call("POST", "/api/v1/models/childbirth-patient/activate/x", {}, true).status, 400);
}

TEST_F(ServiceTest, RegistrySurvivesRestart) {
  auto m = t::shipped_model("childbirth-patient");
  std::get<LogisticModel>(m).intercept = -3.0;
  const int v = registry->add_version(m);
  registry->activate("childbirth-patient", v);
  open();
  EXPECT_EQ(registry->active("childbirth-patient")->version, v);
  EXPECT_EQ(std::get<LogisticModel>(registry->active("childbirth-patient")->model).intercept, -3.0);
  EXPECT_EQ(registry->versions("childbirth-patient"), (std::vector<int>{1, 2}));
  EXPECT_EQ(registry->active("sti-hiv")->version, 1);
}

TEST_F(ServiceTest, ConcurrentActivationsLeaveOneConsistentVersion) {
  auto m = t::shipped_model("childbirth-patient");
  std::get<LogisticModel>(m).intercept = -2.0;
  const int v2 = registry->add_version(m);
  const auto s = t::shipped_schema("childbirth-patient");
  const AnswerSet a{s.id, {{"c_section", true}}, std::nullopt};
  const std::string body1 = assessment_body(assess(s, t::shipped_model(s.id), a));
  const std::string body2 = assessment_body(assess(s, m, a));
  std::atomic<bool> torn{false};
  std::vector<std::thread> threads;
  for (int k = 0; k < 2; ++k) {
    threads.emplace_back([&, k] {
      for (int i = 0; i < 50; ++i) call("POST", "/api/v1/models/childbirth-patient/activate/" + std::to_string(k ? v2 : 1), {}, true);
    });
  }
  for (int k = 0; k < 2; ++k) {
    threads.emplace_back([&] {
      for (int i = 0; i < 100; ++i) {
        const auto r = call("POST", "/api/v1/assess/childbirth-patient", answer_set_to_json(a).dump());
        if (r.body != body1 && r.body != body2) torn = true;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_FALSE(torn);
  const int in_memory = registry->active(s.id)->version;
  open();
  EXPECT_EQ(registry->active(s.id)->version, in_memory);
}

TEST_F(ServiceTest, GameHidesActualUntilGuess) {
  const std::string answers = R"({"schema_id":"sti-hiv","answers":{"contact_type":"receptive_anal","partner_msm":true}})";
  const auto created = call("POST", "/api/v1/game", answers);
  ASSERT_EQ(created.status, 201) << created.body;
  const auto session = json(created)["session"].get<std::string>();
  EXPECT_GE(session.size(), 32u);
  for (const auto* body : {&created.body}) {
    EXPECT_EQ(body->find("actual"), std::string::npos);
    EXPECT_EQ(body->find("probability"), std::string::npos);
  }
  const auto before = call("GET", "/api/v1/game/" + session);
  EXPECT_EQ(before.status, 200);
  EXPECT_EQ(before.body.find("actual"), std::string::npos);
  EXPECT_EQ(json(before)["state"], "awaiting-guess");

  const auto direct = json(call("POST", "/api/v1/assess/sti-hiv", answers));
  const double p = direct["probability"].get<double>();
  const auto reveal = call("POST", "/api/v1/game/" + session + "/guess", nlohmann::json{{"probability", p}}.dump());
  ASSERT_EQ(reveal.status, 200) << reveal.body;
  const auto doc = json(reveal);
  EXPECT_EQ(doc["actual"], direct);
  EXPECT_EQ(doc["absolute_error"].get<double>(), 0.0);
  EXPECT_EQ(doc["band_match"], true);
  EXPECT_EQ(doc["state"], "revealed");

  EXPECT_EQ(call("POST", "/api/v1/game/" + session + "/guess", R"({"band":"low"})").status, 409);
  EXPECT_EQ(json(call("GET", "/api/v1/game/" + session))["actual"], direct);
  EXPECT_EQ(call("POST", "/api/v1/game/deadbeef/guess", R"({"band":"low"})").status, 404);
}

TEST_F(ServiceTest, GameGuessValidation) {
  const auto created = call("POST", "/api/v1/game", R"({"schema_id":"childbirth-patient","answers":{}})");
  ASSERT_EQ(created.status, 201);
  const auto session = json(created)["session"].get<std::string>();
  const std::string path = "/api/v1/game/" + session + "/guess";
  EXPECT_EQ(call("POST", path, R"({"probability":1.5})").status, 400);
  EXPECT_EQ(call("POST", path, R"({"band":"purple"})").status, 400);
  EXPECT_EQ(call("POST", path, R"({})").status, 400);
  const auto r = call("POST", path, R"({"band":"very-high"})");
  ASSERT_EQ(r.status, 200);
  EXPECT_TRUE(json(r)["absolute_error"].is_null());
  EXPECT_EQ(call("POST", "/api/v1/game", R"({"answers":{}})").status, 400);
}

TEST(GameStore, SessionsExpire) {
  auto now = std::chrono::steady_clock::time_point{};
  GameStore store(std::chrono::seconds(3600), [&] { return now; });
  const auto id = store.create("x", {}, make_assessment(0.1, {}), {})["session"].get<std::string>();
  now += std::chrono::seconds(3599);
  EXPECT_NO_THROW(store.view(id));
  now += std::chrono::seconds(2);
  EXPECT_THROW(store.view(id), Error);
  EXPECT_EQ(store.size(), 0u);
}

TEST(ServiceConfig, ReadsKeys) {
  std::map<std::string, std::string> env{{"INFRISK_LISTEN", "0.0.0.0:9000"}, {"INFRISK_TOKEN", "abc"},
                                         {"INFRISK_CORS_ORIGIN", "http://localhost:5173"},
                                         {"INFRISK_GAME_TTL_SECONDS", "60"}};
  const auto cfg = config_from([&](const std::string& k) -> std::optional<std::string> {
    auto it = env.find(k);
    if (it == env.end()) return std::nullopt;
    return it->second;
  });
  EXPECT_EQ(cfg.host, "0.0.0.0");
  EXPECT_EQ(cfg.port, 9000);
  EXPECT_EQ(cfg.bearer_token, "abc");
  EXPECT_EQ(cfg.game_ttl.count(), 60);
  env["INFRISK_LISTEN"] = "host:notaport";
  EXPECT_THROW(config_from([&](const std::string& k) -> std::optional<std::string> {
                 auto it = env.find(k);
                 if (it == env.end()) return std::nullopt;
                 return it->second;
               }),
               Error);
  t::TempDir d;
  const auto f = d.write("env", "# comment\nINFRISK_TOKEN=\"quoted\"\nexport INFRISK_LISTEN=8081\n");
  const auto values = read_env_file(f);
  EXPECT_EQ(values.at("INFRISK_TOKEN"), "quoted");
  EXPECT_EQ(values.at("INFRISK_LISTEN"), "8081");
}

TEST(HttpServer, PortIsExclusiveAndReleasedWithoutRun) {
  t::TempDir dir;
  ModelRegistry registry(dir.path() / "reg", SchemaCatalog::load_directory(t::source_dir() / "schemas"));
  Api api(registry, {});
  int port = 0;
  {
    HttpServer first(api);
    port = first.bind("127.0.0.1", 0);
    HttpServer second(api);
    EXPECT_THROW(second.bind("127.0.0.1", port), Error);
  }
  HttpServer again(api);
  EXPECT_EQ(again.bind("127.0.0.1", port), port);
}

TEST(HttpServer, SmokeOverLoopback) {
  t::TempDir dir;
  ModelRegistry registry(dir.path() / "reg", SchemaCatalog::load_directory(t::source_dir() / "schemas"));
  registry.seed_defaults(t::source_dir() / "models");
  ServiceConfig cfg;
  cfg.cors_origin = "http://localhost:5173";
  Api api(registry, cfg);
  HttpServer server(api);
  const int port = server.bind("127.0.0.1", 0);
  std::thread worker([&] { server.run(); });
  server.wait_until_ready();

  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/api/v1/schemas");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "http://localhost:5173");
  auto post = client.Post("/api/v1/assess/sti-hiv", R"({"answers":{"contact_type":"insertive_oral"}})",
                          "application/json");
  ASSERT_TRUE(post);
  EXPECT_EQ(post->status, 200);
  auto options = client.Options("/api/v1/assess/sti-hiv");
  ASSERT_TRUE(options);
  EXPECT_EQ(options->status, 204);

  server.stop();
  worker.join();
}
