#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "tbm/io.hpp"

namespace tbm {

// ---------------------------------------------------------------------------
// Canonical writer

namespace {

void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

bool is_scalar_array(const Json& j) {
  for (const auto& e : j)
    if (e.is_array() || e.is_object()) return false;
  return true;
}

void write(std::string& out, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        out += Json(it.key()).dump();
        out += ": ";
        write(out, it.value(), indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (is_scalar_array(j)) {
        out += '[';
        bool first = true;
        for (const auto& e : j) {
          if (!first) out += ", ";
          first = false;
          write(out, e, indent + 1);
        }
        out += ']';
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        write(out, e, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float:
      write_number(out, j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string canonical_dump(const Json& j) {
  std::string out;
  write(out, j, 0);
  out += '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Strict readers

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ParseError(0, path, path + ": " + what);
}

Json parse_document(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, "", std::string("malformed JSON: ") + e.what());
  }
}

const Json& member(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing");
  return *it;
}

double number(const Json& j, const std::string& path, bool allow_null = false) {
  if (j.is_null() && allow_null) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double number_at(const Json& obj, const char* key, const std::string& path) {
  return number(member(obj, key, path), path + "." + key);
}

std::uint64_t unsigned_int(const Json& obj, const char* key, const std::string& path) {
  const Json& j = member(obj, key, path);
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    fail(path + "." + key, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

std::string string(const Json& obj, const char* key, const std::string& path) {
  const Json& j = member(obj, key, path);
  if (!j.is_string()) fail(path + "." + key, "expected a string");
  return j.get<std::string>();
}

bool boolean(const Json& obj, const char* key, const std::string& path) {
  const Json& j = member(obj, key, path);
  if (!j.is_boolean()) fail(path + "." + key, "expected a boolean");
  return j.get<bool>();
}

std::vector<double> vector(const Json& j, const std::string& path, std::size_t expected,
                           bool allow_null = false) {
  if (!j.is_array()) fail(path, "expected an array");
  if (expected != static_cast<std::size_t>(-1) && j.size() != expected)
    fail(path, "expected " + std::to_string(expected) + " entries, found " + std::to_string(j.size()));
  std::vector<double> v;
  v.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v.push_back(number(j[i], path + "[" + std::to_string(i) + "]", allow_null));
  return v;
}

constexpr std::size_t kAny = static_cast<std::size_t>(-1);

std::vector<std::vector<double>> matrix(const Json& j, const std::string& path, std::size_t rows,
                                        std::size_t cols, bool allow_null = false) {
  if (!j.is_array()) fail(path, "expected a nested array");
  if (j.size() != rows)
    fail(path, "expected " + std::to_string(rows) + " rows, found " + std::to_string(j.size()));
  std::vector<std::vector<double>> m;
  for (std::size_t i = 0; i < rows; ++i)
    m.push_back(vector(j[i], path + "[" + std::to_string(i) + "]", cols, allow_null));
  return m;
}

template <std::size_t N>
std::array<double, N> fixed(const Json& j, const std::string& path) {
  const auto v = vector(j, path, N);
  std::array<double, N> a{};
  std::copy(v.begin(), v.end(), a.begin());
  return a;
}

Json matrix_json(const std::vector<std::vector<double>>& m) {
  Json out = Json::array();
  for (const auto& row : m) out.push_back(row);
  return out;
}

// ---------------------------------------------------------------------------
// Model bundle

Json pca_json(const Pca2& p) {
  Json j;
  j["loading"] = p.loading;
  j["eigenvalues"] = p.eigenvalues;
  return j;
}

Pca2 pca_from(const Json& j, const std::string& path) {
  Pca2 p;
  p.loading = fixed<2>(member(j, "loading", path), path + ".loading");
  p.eigenvalues = fixed<2>(member(j, "eigenvalues", path), path + ".eigenvalues");
  return p;
}

Json config_json(const TrainConfig& c) {
  Json j;
  j["learn_rate"] = c.learn_rate;
  j["gd_iterations"] = c.gd_iterations;
  j["sa_initial_temp"] = c.sa_initial_temp;
  j["sa_drop_ratio"] = c.sa_drop_ratio;
  j["sa_inner_loops"] = c.sa_inner_loops;
  j["sa_iterations"] = c.sa_iterations;
  j["sa_final_temp"] = c.sa_final_temp;
  j["seed"] = c.seed;
  j["target_normalization"] = c.target_normalization;
  j["simulated_annealing"] = c.simulated_annealing;
  return j;
}

TrainConfig config_from(const Json& j, const std::string& path) {
  TrainConfig c;
  c.learn_rate = number_at(j, "learn_rate", path);
  c.gd_iterations = unsigned_int(j, "gd_iterations", path);
  c.sa_initial_temp = number_at(j, "sa_initial_temp", path);
  c.sa_drop_ratio = number_at(j, "sa_drop_ratio", path);
  c.sa_inner_loops = unsigned_int(j, "sa_inner_loops", path);
  c.sa_iterations = unsigned_int(j, "sa_iterations", path);
  c.sa_final_temp = number_at(j, "sa_final_temp", path);
  c.seed = unsigned_int(j, "seed", path);
  c.target_normalization = boolean(j, "target_normalization", path);
  c.simulated_annealing = boolean(j, "simulated_annealing", path);
  return c;
}

EvalReport report_from(const Json& j, const std::string& path) {
  EvalReport r;
  r.mae = number_at(j, "mae", path);
  r.mape = number_at(j, "mape", path);
  const Json& t = member(j, "trend_accuracy", path);
  if (!t.is_null()) r.trend_accuracy = number(t, path + ".trend_accuracy");
  r.n = unsigned_int(j, "n", path);
  return r;
}

}  // namespace

Json to_json(const EvalReport& r) {
  Json j;
  j["mae"] = r.mae;
  j["mape"] = r.mape;
  j["trend_accuracy"] = r.trend_accuracy ? Json(*r.trend_accuracy) : Json(nullptr);
  j["n"] = r.n;
  return j;
}

std::string save_model(const ModelBundle& b) {
  validate(b);
  Json j;
  j["schema_version"] = b.schema_version;
  j["target"] = to_string(b.target);
  j["created_at"] = b.created_at;

  const auto& st = b.preprocessor;
  Json pre;
  pre["feature_names"] = st.feature_names;
  pre["raw_features"] = raw_feature_names();
  pre["means"] = st.means;
  pre["stds"] = st.stds;
  pre["pca_ucs_th"] = pca_json(st.pca_ucs_th);
  pre["pca_ci_m"] = pca_json(st.pca_ci_m);
  Json cats = Json::object();
  for (int m = 1; m <= 4; ++m) cats[std::to_string(m)] = one_hot(m);
  pre["mgt_categories"] = cats;
  pre["output_dim"] = st.output_dim;
  j["preprocessor"] = pre;

  const auto& n = b.network;
  Json net;
  net["input_dim"] = n.input_dim;
  net["hidden_nodes"] = n.hidden_nodes;
  net["hidden_activation"] = n.hidden_activation;
  net["output_activation"] = n.output_activation;
  Json wih = Json::array();
  for (std::size_t h = 0; h < n.hidden_nodes; ++h) {
    const auto first = n.weights_ih.begin() + static_cast<std::ptrdiff_t>(h * n.input_dim);
    wih.push_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n.input_dim)));
  }
  net["weights_ih"] = wih;
  net["bias_h"] = n.bias_h;
  net["weights_ho"] = Json::array({n.weights_ho});
  net["bias_o"] = n.bias_o;
  j["network"] = net;

  Json scaler;
  scaler["mean"] = b.target_scaler.mean;
  scaler["std"] = b.target_scaler.std;
  j["target_scaler"] = scaler;

  const auto& m = b.training_meta;
  Json meta;
  meta["seed"] = m.seed;
  meta["config"] = config_json(m.config);
  meta["architecture"] = {{"input_dim", m.architecture.input_dim},
                          {"hidden_nodes", m.architecture.hidden_nodes}};
  meta["folds"] = m.folds;
  meta["n_records"] = m.n_records;
  Json reports = Json::array();
  for (const auto& r : m.fold_reports) reports.push_back(to_json(r));
  meta["fold_reports"] = reports;
  meta["selected_fold"] = m.selected_fold;
  meta["selected"] = to_json(m.selected);
  j["training_meta"] = meta;
  return canonical_dump(j);
}

ModelBundle load_model(std::string_view text) {
  const Json j = parse_document(text);
  if (!j.is_object()) fail("$", "expected an object");
  const std::string root = "$";

  ModelBundle b;
  const Json& version = member(j, "schema_version", root);
  if (!version.is_string()) fail("$.schema_version", "expected a string");
  b.schema_version = version.get<std::string>();
  if (b.schema_version != kSchemaVersion) throw UnsupportedVersion(b.schema_version);
  try {
    b.target = parse_target(string(j, "target", root));
  } catch (const InvalidInput& e) {
    fail("$.target", e.what());
  }
  b.created_at = string(j, "created_at", root);

  const std::string pp = "$.preprocessor";
  const Json& pre = member(j, "preprocessor", root);
  const Json& names = member(pre, "feature_names", pp);
  if (!names.is_array() || names.size() != kModelInputDim) fail(pp + ".feature_names", "expected 11 names");
  for (std::size_t i = 0; i < kModelInputDim; ++i) {
    if (!names[i].is_string()) fail(pp + ".feature_names", "expected strings");
    b.preprocessor.feature_names[i] = names[i].get<std::string>();
  }
  if (b.preprocessor.feature_names != model_feature_names())
    fail(pp + ".feature_names", "feature layout does not match this build");
  b.preprocessor.means = fixed<kRawFeatureCount>(member(pre, "means", pp), pp + ".means");
  b.preprocessor.stds = fixed<kRawFeatureCount>(member(pre, "stds", pp), pp + ".stds");
  b.preprocessor.pca_ucs_th = pca_from(member(pre, "pca_ucs_th", pp), pp + ".pca_ucs_th");
  b.preprocessor.pca_ci_m = pca_from(member(pre, "pca_ci_m", pp), pp + ".pca_ci_m");
  b.preprocessor.output_dim = unsigned_int(pre, "output_dim", pp);

  const std::string np = "$.network";
  const Json& net = member(j, "network", root);
  const std::size_t in = unsigned_int(net, "input_dim", np);
  const std::size_t hid = unsigned_int(net, "hidden_nodes", np);
  if (in == 0 || hid == 0 || in > 4096 || hid > 4096) fail(np, "implausible network dimensions");
  b.network = NetworkParams::zeros(in, hid);
  b.network.hidden_activation = string(net, "hidden_activation", np);
  b.network.output_activation = string(net, "output_activation", np);
  const auto wih = matrix(member(net, "weights_ih", np), np + ".weights_ih", hid, in);
  for (std::size_t h = 0; h < hid; ++h)
    std::copy(wih[h].begin(), wih[h].end(), b.network.weights_ih.begin() + static_cast<std::ptrdiff_t>(h * in));
  b.network.bias_h = vector(member(net, "bias_h", np), np + ".bias_h", hid);
  b.network.weights_ho = matrix(member(net, "weights_ho", np), np + ".weights_ho", 1, hid)[0];
  b.network.bias_o = number_at(net, "bias_o", np);

  const Json& scaler = member(j, "target_scaler", root);
  b.target_scaler.mean = number_at(scaler, "mean", "$.target_scaler");
  b.target_scaler.std = number_at(scaler, "std", "$.target_scaler");

  const std::string mp = "$.training_meta";
  const Json& meta = member(j, "training_meta", root);
  auto& m = b.training_meta;
  m.seed = unsigned_int(meta, "seed", mp);
  m.config = config_from(member(meta, "config", mp), mp + ".config");
  const Json& arch = member(meta, "architecture", mp);
  m.architecture.input_dim = unsigned_int(arch, "input_dim", mp + ".architecture");
  m.architecture.hidden_nodes = unsigned_int(arch, "hidden_nodes", mp + ".architecture");
  m.folds = unsigned_int(meta, "folds", mp);
  m.n_records = unsigned_int(meta, "n_records", mp);
  const Json& reports = member(meta, "fold_reports", mp);
  if (!reports.is_array()) fail(mp + ".fold_reports", "expected an array");
  for (std::size_t i = 0; i < reports.size(); ++i)
    m.fold_reports.push_back(report_from(reports[i], mp + ".fold_reports[" + std::to_string(i) + "]"));
  m.selected_fold = unsigned_int(meta, "selected_fold", mp);
  m.selected = report_from(member(meta, "selected", mp), mp + ".selected");

  try {
    validate(b);
  } catch (const InvalidInput& e) {
    throw ParseError(0, e.field(), std::string("inconsistent model: ") + e.what());
  }
  return b;
}

// ---------------------------------------------------------------------------
// Decision payloads

Json to_json(const Recommendation& r) {
  Json j;
  j["th"] = r.th;
  j["tor"] = r.tor;
  j["pr"] = r.pr;
  j["ef"] = r.ef;
  j["cost"] = r.cost;
  j["cutter_cost"] = r.cutter_cost;
  j["period_cost"] = r.period_cost;
  j["feasible_fraction"] = r.feasible_fraction;
  return j;
}

Json to_json(const CostSurface& s) {
  Json j;
  j["th_values"] = s.th_values;
  j["tor_values"] = s.tor_values;
  j["cost"] = matrix_json(s.cost);
  j["pr"] = matrix_json(s.pr);
  j["ef"] = matrix_json(s.ef);
  j["optimum"] = {{"th_index", s.optimum_th},
                  {"tor_index", s.optimum_tor},
                  {"th", s.th_values.at(s.optimum_th)},
                  {"tor", s.tor_values.at(s.optimum_tor)}};
  return j;
}

Json to_json(const CostParams& p) {
  Json j;
  j["c1"] = p.c1;
  j["c2"] = p.c2;
  j["d_tbm"] = p.d_tbm;
  j["w_max"] = p.w_max;
  j["t_daily"] = p.t_daily;
  j["l"] = p.l;
  return j;
}

Json to_json(const GridSpec& g) {
  Json j;
  j["th_min"] = g.th_min;
  j["th_max"] = g.th_max;
  j["th_step"] = g.th_step;
  j["tor_min"] = g.tor_min;
  j["tor_max"] = g.tor_max;
  j["tor_step"] = g.tor_step;
  return j;
}

Json to_json(const RockMassState& r) {
  Json j;
  j["src"] = r.src;
  j["ucs"] = r.ucs;
  j["rqd"] = r.rqd;
  j["cai"] = r.cai;
  j["q"] = r.q;
  j["ci"] = r.ci;
  j["m"] = r.m;
  j["mgt"] = r.mgt;
  return j;
}

std::string save_surface(const CostSurface& s) { return canonical_dump(to_json(s)); }

CostSurface load_surface(std::string_view text) {
  const Json j = parse_document(text);
  const std::string root = "$";
  CostSurface s;
  s.th_values = vector(member(j, "th_values", root), "$.th_values", kAny);
  s.tor_values = vector(member(j, "tor_values", root), "$.tor_values", kAny);
  const std::size_t r = s.th_values.size();
  const std::size_t c = s.tor_values.size();
  if (r == 0 || c == 0) fail("$", "surface axes must be non-empty");
  s.cost = matrix(member(j, "cost", root), "$.cost", r, c, true);
  s.pr = matrix(member(j, "pr", root), "$.pr", r, c, true);
  s.ef = matrix(member(j, "ef", root), "$.ef", r, c, true);
  const Json& opt = member(j, "optimum", root);
  s.optimum_th = unsigned_int(opt, "th_index", "$.optimum");
  s.optimum_tor = unsigned_int(opt, "tor_index", "$.optimum");
  if (s.optimum_th >= r || s.optimum_tor >= c) fail("$.optimum", "index out of range");
  return s;
}

// ---------------------------------------------------------------------------
// Request payloads

ValidationError::ValidationError(std::vector<FieldError> errors)
    : Error(ErrorCode::invalid_input, errors.empty() ? "" : errors.front().field,
            errors.empty() ? "validation failed"
                           : errors.front().field + ": " + errors.front().message),
      errors_(std::move(errors)) {}

namespace {

class Collector {
 public:
  explicit Collector(std::string prefix) : prefix_(std::move(prefix)) {}

  std::string path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }
  void add(const std::string& key, const std::string& message) {
    errors_.push_back({path(key), message});
  }

  // Reads an optional numeric member; `required` turns absence into an error.
  void read(const Json& obj, const char* key, double& out, bool required) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) add(key, "is required");
      return;
    }
    if (!it->is_number()) {
      add(key, "must be a number");
      return;
    }
    out = it->get<double>();
  }

  void read_int(const Json& obj, const char* key, int& out, bool required) {
    double v = 0.0;
    const auto before = errors_.size();
    const bool present = obj.find(key) != obj.end();
    read(obj, key, v, required);
    if (errors_.size() != before || !present) return;
    if (v != std::floor(v) || std::abs(v) > 1e6) {
      add(key, "must be an integer");
      return;
    }
    out = static_cast<int>(v);
  }

  template <class T>
  void check(const T& value) {
    if (!errors_.empty()) return;
    try {
      validate(value);
    } catch (const InvalidInput& e) {
      add(e.field(), e.what());
    }
  }

  void raise_if_any() {
    if (!errors_.empty()) throw ValidationError(std::move(errors_));
  }

  bool expect_object(const Json& j) {
    if (j.is_object()) return true;
    errors_.push_back({prefix_.empty() ? "$" : prefix_, "must be a JSON object"});
    return false;
  }

 private:
  std::string prefix_;
  std::vector<FieldError> errors_;
};

}  // namespace

RockMassState rock_from_json(const Json& j, const std::string& prefix) {
  Collector c(prefix);
  RockMassState r;
  if (c.expect_object(j)) {
    c.read_int(j, "src", r.src, true);
    c.read(j, "ucs", r.ucs, true);
    c.read(j, "rqd", r.rqd, true);
    c.read(j, "cai", r.cai, true);
    c.read(j, "q", r.q, true);
    c.read(j, "ci", r.ci, true);
    c.read(j, "m", r.m, true);
    c.read_int(j, "mgt", r.mgt, true);
    c.check(r);
  }
  c.raise_if_any();
  return r;
}

CostParams cost_from_json(const Json& j, const CostParams& base, const std::string& prefix) {
  Collector c(prefix);
  CostParams p = base;
  if (c.expect_object(j)) {
    c.read(j, "c1", p.c1, false);
    c.read(j, "c2", p.c2, false);
    c.read(j, "d_tbm", p.d_tbm, false);
    c.read(j, "w_max", p.w_max, false);
    c.read(j, "t_daily", p.t_daily, false);
    c.read(j, "l", p.l, false);
    c.check(p);
  }
  c.raise_if_any();
  return p;
}

GridSpec grid_from_json(const Json& j, const GridSpec& base, const std::string& prefix) {
  Collector c(prefix);
  GridSpec g = base;
  if (c.expect_object(j)) {
    c.read(j, "th_min", g.th_min, false);
    c.read(j, "th_max", g.th_max, false);
    c.read(j, "th_step", g.th_step, false);
    c.read(j, "tor_min", g.tor_min, false);
    c.read(j, "tor_max", g.tor_max, false);
    c.read(j, "tor_step", g.tor_step, false);
    c.check(g);
  }
  c.raise_if_any();
  return g;
}

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

}  // namespace tbm
