#include "tbm/service.hpp"

#include <httplib.h>

#include <cmath>

#include "tbm/error.hpp"
#include "tbm/synth.hpp"

namespace tbm {

namespace {

Response json_response(int status, const Json& j) { return {status, canonical_dump(j)}; }

Response error_response(int status, const std::string& code, const std::vector<FieldError>& errors) {
  Json list = Json::array();
  for (const auto& e : errors) list.push_back({{"field", e.field}, {"message", e.message}});
  Json j;
  j["code"] = code;
  j["errors"] = list;
  return json_response(status, j);
}

Json model_info(const ModelBundle& b) {
  const auto& m = b.training_meta;
  Json j;
  j["target"] = to_string(b.target);
  j["schema_version"] = b.schema_version;
  j["created_at"] = b.created_at;
  j["architecture"] = {{"input_dim", b.network.input_dim},
                       {"hidden_nodes", b.network.hidden_nodes},
                       {"hidden_activation", b.network.hidden_activation},
                       {"output_activation", b.network.output_activation}};
  j["feature_names"] = b.preprocessor.feature_names;
  j["seed"] = m.seed;
  j["folds"] = m.folds;
  j["n_records"] = m.n_records;
  j["selected_fold"] = m.selected_fold;
  j["selected"] = to_json(m.selected);
  Json folds = Json::array();
  for (const auto& r : m.fold_reports) folds.push_back(to_json(r));
  j["fold_reports"] = folds;
  return j;
}

Predictor shared_predictor(std::shared_ptr<const ModelBundle> b) {
  return [b = std::move(b)](const RockMassState& r, const MachineSetting& m) { return b->predict(r, m); };
}

// Request members that must be JSON objects when present.
const Json* optional_object(const Json& req, const char* key) {
  const auto it = req.find(key);
  if (it == req.end() || it->is_null()) return nullptr;
  return &*it;
}

const Json& required_object(const Json& req, const char* key) {
  const auto it = req.find(key);
  if (it == req.end()) throw ValidationError(key, "is required");
  return *it;
}

CostParams resolve_cost(const Json& req) {
  const Json* c = optional_object(req, "cost");
  return c ? cost_from_json(*c) : CostParams{};
}

GridSpec resolve_grid(const Json& req) {
  const Json* g = optional_object(req, "grid");
  if (!g) return GridSpec{};
  const GridSpec grid = grid_from_json(*g);
  const double nth = std::floor((grid.th_max - grid.th_min) / grid.th_step) + 1;
  const double ntor = std::floor((grid.tor_max - grid.tor_min) / grid.tor_step) + 1;
  if (nth * ntor > static_cast<double>(kMaxGridPoints))
    throw ValidationError("grid", "grid exceeds " + std::to_string(kMaxGridPoints) + " points");
  return grid;
}

// Reads {th, tor} from `obj`, reporting fields under `prefix`.
MachineSetting machine_from(const Json& obj, const std::string& prefix) {
  std::vector<FieldError> errors;
  MachineSetting m;
  auto field = [&](const char* key) { return prefix.empty() ? std::string(key) : prefix + "." + key; };
  auto read = [&](const char* key, double& out) {
    const auto it = obj.find(key);
    if (it == obj.end())
      errors.push_back({field(key), "is required"});
    else if (!it->is_number())
      errors.push_back({field(key), "must be a number"});
    else
      out = it->get<double>();
  };
  if (!obj.is_object()) throw ValidationError(prefix.empty() ? "$" : prefix, "must be a JSON object");
  read("th", m.th);
  read("tor", m.tor);
  if (errors.empty()) {
    try {
      validate(m);
    } catch (const InvalidInput& e) {
      errors.push_back({field(e.field().c_str()), e.what()});
    }
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return m;
}

Json breakdown_json(const CostBreakdown& c) {
  return {{"total", c.total}, {"cutter", c.cutter}, {"period", c.period}};
}

Json evaluation_json(const PointEvaluation& e) {
  Json j;
  j["th"] = e.machine.th;
  j["tor"] = e.machine.tor;
  j["pr"] = e.pr;
  j["ef"] = e.ef;
  j["feasible"] = e.feasible;
  j["cost"] = e.feasible ? breakdown_json(e.cost) : Json(nullptr);
  return j;
}

}  // namespace

Service::Service(ModelBundle pr_model, ModelBundle ef_model) {
  validate(pr_model);
  validate(ef_model);
  if (pr_model.target != Target::pr) throw InvalidInput("pr_model", "model does not predict pr");
  if (ef_model.target != Target::ef) throw InvalidInput("ef_model", "model does not predict ef");
  models_["pr"] = model_info(pr_model);
  models_["ef"] = model_info(ef_model);
  pr_ = shared_predictor(std::make_shared<const ModelBundle>(std::move(pr_model)));
  ef_ = shared_predictor(std::make_shared<const ModelBundle>(std::move(ef_model)));
}

Service::Service(Predictor pr_model, Predictor ef_model, Json models)
    : pr_(std::move(pr_model)), ef_(std::move(ef_model)), models_(std::move(models)) {}

Response Service::handle(std::string_view method, std::string_view path, std::string_view body) const {
  try {
    const bool get = method == "GET";
    const bool post = method == "POST";
    auto body_json = [&] {
      Json req;
      try {
        req = Json::parse(body.begin(), body.end());
      } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("$", std::string("malformed JSON: ") + e.what());
      }
      if (!req.is_object()) throw ValidationError("$", "request body must be a JSON object");
      return req;
    };
    auto wrong_method = [&] {
      return error_response(405, "method_not_allowed", {{"method", std::string(method) + " not allowed"}});
    };

    if (path == "/api/v1/health") {
      if (!get) return wrong_method();
      return json_response(200, {{"status", "ok"}, {"schema_version", kSchemaVersion}});
    }
    if (path == "/api/v1/models") {
      if (!get) return wrong_method();
      return json_response(200, models_);
    }
    if (path == "/api/v1/predict") {
      if (!post) return wrong_method();
      return predict(body_json());
    }
    if (path == "/api/v1/recommend") {
      if (!post) return wrong_method();
      return recommend(body_json());
    }
    if (path == "/api/v1/surface") {
      if (!post) return wrong_method();
      return surface(body_json());
    }
    return error_response(404, "not_found", {{"path", "no route for " + std::string(path)}});
  } catch (const ValidationError& e) {
    return error_response(400, to_string(e.code()), e.errors());
  } catch (const NoFeasiblePoint& e) {
    Response r = error_response(422, to_string(e.code()), {{"", e.what()}});
    Json j = Json::parse(r.body);
    j["feasible_fraction"] = e.feasible_fraction();
    return json_response(422, j);
  } catch (const Error& e) {
    const int status = e.code() == ErrorCode::invalid_input || e.code() == ErrorCode::parse_error ? 400 : 422;
    return error_response(status, to_string(e.code()), {{e.field(), e.what()}});
  } catch (const std::exception& e) {
    return error_response(500, "internal", {{"", e.what()}});
  }
}

Response Service::predict(const Json& req) const {
  const RockMassState rock = rock_from_json(required_object(req, "rock"));
  const MachineSetting machine = machine_from(req, "");
  const CostParams p = resolve_cost(req);
  const PointEvaluation e = evaluate_point(rock, machine, pr_, ef_, p);
  Json j;
  j["rock"] = to_json(rock);
  j["th"] = machine.th;
  j["tor"] = machine.tor;
  j["pr"] = e.pr;
  j["ef"] = e.ef;
  j["feasible"] = e.feasible;
  j["cost"] = e.feasible ? breakdown_json(e.cost) : Json(nullptr);
  j["cost_params"] = to_json(p);
  if (!e.feasible) {
    j["code"] = to_string(ErrorCode::infeasible_point);
    j["errors"] = Json::array({{{"field", ""}, {"message", "predicted pr or ef is not positive"}}});
    return json_response(422, j);
  }
  return json_response(200, j);
}

Response Service::recommend(const Json& req) const {
  const RockMassState rock = rock_from_json(required_object(req, "rock"));
  const CostParams p = resolve_cost(req);
  const GridSpec g = resolve_grid(req);
  std::optional<MachineSetting> baseline;
  if (const Json* b = optional_object(req, "baseline")) baseline = machine_from(*b, "baseline");

  const Recommendation rec = optimize(rock, pr_, ef_, p, g);
  Json j;
  j["rock"] = to_json(rock);
  j["cost_params"] = to_json(p);
  j["grid"] = to_json(g);
  j["recommendation"] = to_json(rec);
  if (baseline) {
    const PointEvaluation e = evaluate_point(rock, *baseline, pr_, ef_, p);
    Json bj = evaluation_json(e);
    bj["on_grid"] = on_grid(*baseline, g);
    j["baseline"] = bj;
    if (e.feasible) {
      FieldComparison c;
      c.pr_before = e.pr;
      c.ef_before = e.ef;
      c.cost_before = e.cost.total;
      c.pr_after = rec.pr;
      c.ef_after = rec.ef;
      c.cost_after = rec.cost;
      j["comparison"] = {{"pr_change_pct", c.pr_change_pct()},
                         {"ef_change_pct", c.ef_change_pct()},
                         {"cost_reduction_pct", c.cost_reduction_pct()}};
    } else {
      j["comparison"] = nullptr;
    }
  }
  return json_response(200, j);
}

Response Service::surface(const Json& req) const {
  const RockMassState rock = rock_from_json(required_object(req, "rock"));
  const CostParams p = resolve_cost(req);
  const GridSpec g = resolve_grid(req);
  return json_response(200, to_json(cost_surface(rock, pr_, ef_, p, g)));
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  const Service& service;
  httplib::Server server;

  explicit Impl(const Service& s) : service(s) {
    auto route = [this](const httplib::Request& req, httplib::Response& res) {
      const Response r = service.handle(req.method, req.path, req.body);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
    server.Get(R"(/.*)", route);
    server.Post(R"(/.*)", route);
    server.Put(R"(/.*)", route);
    server.Delete(R"(/.*)", route);
  }
};

HttpServer::HttpServer(const Service& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace tbm
