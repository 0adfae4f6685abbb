#pragma once

// HTTP/JSON front end over a pair of loaded surrogate models.
//
//   GET  /api/v1/health
//   GET  /api/v1/models
//   POST /api/v1/predict    {rock, th, tor, cost?}
//   POST /api/v1/recommend  {rock, cost?, grid?, baseline?}
//   POST /api/v1/surface    {rock, cost?, grid?}

#include <memory>
#include <string>
#include <string_view>

#include "tbm/decision.hpp"
#include "tbm/io.hpp"
#include "tbm/model.hpp"

namespace tbm {

struct Response {
  int status = 200;
  std::string body;
};

// Grids larger than this are rejected to keep a single request bounded.
inline constexpr std::size_t kMaxGridPoints = 1'000'000;

class Service {
 public:
  Service(ModelBundle pr_model, ModelBundle ef_model);
  // Arbitrary predictors; `models` is returned verbatim by /api/v1/models.
  Service(Predictor pr_model, Predictor ef_model, Json models);

  // Pure function of the loaded models and the request; never throws.
  Response handle(std::string_view method, std::string_view path, std::string_view body) const;

 private:
  Response predict(const Json& req) const;
  Response recommend(const Json& req) const;
  Response surface(const Json& req) const;

  Predictor pr_;
  Predictor ef_;
  Json models_;
};

// Blocking HTTP server bound to a Service.
class HttpServer {
 public:
  explicit HttpServer(const Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; throws IoError.
  int bind(const std::string& host, int port);
  void listen();  // returns after stop()
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tbm
