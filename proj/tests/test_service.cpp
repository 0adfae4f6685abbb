#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "tbm/service.hpp"
#include "tbm/synth.hpp"

namespace tbm {
namespace {

const Json kRock = {{"src", 3}, {"ucs", 78.43}, {"rqd", 35.17}, {"cai", 3.28},
                    {"q", 75.14}, {"ci", 432.92}, {"m", 12.69}, {"mgt", 2}};

Service stub_service() {
  return Service([](const auto&, const auto&) { return 68.04; },
                 [](const auto&, const auto&) { return 45.21; }, Json{{"stub", true}});
}

Service truth_service() { return Service(pr_truth, ef_truth, Json::object()); }

Json post(const Service& s, const char* path, const Json& body, int expected_status = 200) {
  const auto r = s.handle("POST", path, body.dump());
  EXPECT_EQ(r.status, expected_status) << r.body;
  return Json::parse(r.body);
}

std::vector<std::string> error_fields(const Json& j) {
  std::vector<std::string> out;
  for (const auto& e : j["errors"]) out.push_back(e["field"].get<std::string>());
  return out;
}

TEST(Service, Health) {
  const auto r = stub_service().handle("GET", "/api/v1/health", "");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(Json::parse(r.body)["status"], "ok");
}

TEST(Service, ModelsReturnedVerbatim) {
  const auto r = stub_service().handle("GET", "/api/v1/models", "");
  EXPECT_EQ(Json::parse(r.body), (Json{{"stub", true}}));
}

TEST(Service, PredictWithStubRates) {
  const auto j = post(stub_service(), "/api/v1/predict", {{"rock", kRock}, {"th", 6100}, {"tor", 750}});
  EXPECT_EQ(j["pr"], 68.04);
  EXPECT_EQ(j["ef"], 45.21);
  EXPECT_EQ(j["feasible"], true);
  EXPECT_NEAR(j["cost"]["total"].get<double>(), 9323.98, 1.0);
  EXPECT_EQ(j["cost_params"]["c1"], 30000.0);
}

TEST(Service, PredictCostOverride) {
  const auto j = post(stub_service(), "/api/v1/predict",
                      {{"rock", kRock}, {"th", 6100}, {"tor", 750}, {"cost", {{"c2", 700000.0}}}});
  EXPECT_NEAR(j["cost"]["period"].get<double>(), 2 * cost(68.04, 45.21, {}).period, 1e-9);
}

TEST(Service, RecommendWithBaselineComparison) {
  const auto j = post(truth_service(), "/api/v1/recommend",
                      {{"rock", kRock}, {"baseline", {{"th", 6183.67}, {"tor", 749.67}}}});
  const auto& rec = j["recommendation"];
  const auto expected = optimize(field_test_rock(2), pr_truth, ef_truth, {}, {});
  EXPECT_EQ(rec["th"], expected.th);
  EXPECT_EQ(rec["tor"], expected.tor);
  EXPECT_EQ(rec["cost"], expected.cost);
  EXPECT_EQ(j["baseline"]["on_grid"], false);
  EXPECT_GE(j["comparison"]["cost_reduction_pct"].get<double>(), 0.0);
  EXPECT_EQ(j["grid"]["th_step"], 100.0);
}

TEST(Service, RecommendThenPredictAgree) {
  const auto s = truth_service();
  const auto rec = post(s, "/api/v1/recommend", {{"rock", kRock}})["recommendation"];
  const auto p = post(s, "/api/v1/predict", {{"rock", kRock}, {"th", rec["th"]}, {"tor", rec["tor"]}});
  EXPECT_EQ(p["pr"], rec["pr"]);
  EXPECT_EQ(p["ef"], rec["ef"]);
  EXPECT_EQ(p["cost"]["total"], rec["cost"]);
}

TEST(Service, SurfaceShapeAndReplay) {
  const auto s = truth_service();
  const std::string body = Json{{"rock", kRock}}.dump();
  const auto a = s.handle("POST", "/api/v1/surface", body);
  const auto b = s.handle("POST", "/api/v1/surface", body);
  ASSERT_EQ(a.status, 200);
  EXPECT_EQ(a.body, b.body);
  const auto j = Json::parse(a.body);
  EXPECT_EQ(j["th_values"].size(), 81u);
  EXPECT_EQ(j["tor_values"].size(), 27u);
  EXPECT_EQ(j["cost"].size(), 81u);
  EXPECT_EQ(j["cost"][0].size(), 27u);
}

TEST(Service, ValidationListsFields) {
  const auto s = stub_service();
  Json rock = kRock;
  rock.erase("ucs");
  rock["mgt"] = "two";
  const auto j = post(s, "/api/v1/predict", {{"rock", rock}, {"tor", 750}}, 400);
  EXPECT_EQ(j["code"], "invalid_input");
  EXPECT_EQ(error_fields(j), (std::vector<std::string>{"rock.ucs", "rock.mgt"}));

  const auto k = post(s, "/api/v1/predict", {{"rock", kRock}, {"tor", 750}}, 400);
  EXPECT_EQ(error_fields(k), (std::vector<std::string>{"th"}));

  const auto g = post(s, "/api/v1/recommend", {{"rock", kRock}, {"grid", {{"th_step", -1.0}}}}, 400);
  EXPECT_EQ(error_fields(g), (std::vector<std::string>{"grid.th_step"}));

  // 1601 x 651 nodes: a valid grid, but above the per-request cap.
  const auto big = post(s, "/api/v1/surface", {{"rock", kRock}, {"grid", {{"th_step", 5.0}, {"tor_step", 2.0}}}}, 400);
  EXPECT_EQ(error_fields(big), (std::vector<std::string>{"grid"}));

  const auto m = s.handle("POST", "/api/v1/predict", "{not json");
  EXPECT_EQ(m.status, 400);
  EXPECT_EQ(Json::parse(m.body)["code"], "invalid_input");
}

TEST(Service, RoutingErrors) {
  const auto s = stub_service();
  EXPECT_EQ(s.handle("GET", "/api/v1/nothing", "").status, 404);
  EXPECT_EQ(s.handle("DELETE", "/api/v1/health", "").status, 405);
  EXPECT_EQ(s.handle("GET", "/api/v1/predict", "").status, 405);
}

TEST(Service, NothingFeasible) {
  const Service s([](const auto&, const auto&) { return -1.0; },
                  [](const auto&, const auto&) { return 30.0; }, Json::object());
  const auto j = post(s, "/api/v1/recommend", {{"rock", kRock}}, 422);
  EXPECT_EQ(j["code"], "no_feasible_point");
  EXPECT_EQ(j["feasible_fraction"], 0.0);
  const auto p = post(s, "/api/v1/predict", {{"rock", kRock}, {"th", 5000}, {"tor", 500}}, 422);
  EXPECT_EQ(p["code"], "infeasible_point");
  EXPECT_EQ(p["cost"], nullptr);
}

TEST(HttpServer, ServesOverASocket) {
  const auto s = stub_service();
  HttpServer server(s);
  const int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen(); });
  httplib::Client client("127.0.0.1", port);
  const auto health = client.Get("/api/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  const auto res = client.Post("/api/v1/predict",
                               Json{{"rock", kRock}, {"th", 6100}, {"tor", 750}}.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, s.handle("POST", "/api/v1/predict",
                                Json{{"rock", kRock}, {"th", 6100}, {"tor", 750}}.dump()).body);
  const auto bad = client.Post("/api/v1/recommend", "{}", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  server.stop();
  t.join();
}

}  // namespace
}  // namespace tbm
