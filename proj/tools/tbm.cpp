// tbm: command-line driver.
//
// Exit codes: 0 ok, 2 validation error, 3 runtime or training error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "tbm/domain.hpp"
#include "tbm/error.hpp"
#include "tbm/io.hpp"
#include "tbm/model.hpp"
#include "tbm/service.hpp"
#include "tbm/synth.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kRuntime = 3;

int exit_code(tbm::ErrorCode c) {
  switch (c) {
    case tbm::ErrorCode::invalid_input:
    case tbm::ErrorCode::unsupported_combination:
    case tbm::ErrorCode::parse_error:
    case tbm::ErrorCode::unsupported_version:
      return kValidation;
    default:
      return kRuntime;
  }
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Accepts inline JSON or a path to a JSON file.
tbm::Json json_arg(const std::string& arg, const std::string& what) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  std::string text = arg;
  if (first == std::string::npos || (arg[first] != '{' && arg[first] != '[')) text = tbm::read_file(arg);
  try {
    return tbm::Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw tbm::ParseError(0, what, what + ": malformed JSON: " + e.what());
  }
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    tbm::write_file(out, text);
}

int forward_response(const tbm::Response& r) {
  if (r.status == 200) {
    std::cout << r.body;
    return kOk;
  }
  std::cerr << r.body;
  return r.status < 500 && r.status != 422 ? kValidation : kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TBM thrust/torque decision support"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "random seed")->envname("TBM_SEED")->capture_default_str();
  };

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic records CSV");
  std::string preset = "prcr";
  std::optional<std::size_t> n;
  double noise = 8.0;
  std::string out;
  synth->add_option("--preset", preset)->check(CLI::IsMember({"prcr", "ccr"}));
  synth->add_option("--n", n, "number of records (default: preset train + test)");
  synth->add_option("--noise", noise, "relative noise, percent")->capture_default_str();
  synth->add_option("--out", out, "output CSV (stdout when omitted)");
  add_seed(synth);

  // train
  auto* train = app.add_subcommand("train", "k-fold train a surrogate model");
  std::string data, target = "pr", model_out, created_at;
  std::size_t folds = 0;
  bool no_sa = false;
  train->add_option("--data", data)->required();
  train->add_option("--target", target)->check(CLI::IsMember({"pr", "ef"}));
  train->add_option("--folds", folds, "folds (default 3 for pr, 4 for ef)");
  train->add_option("--out", model_out)->required();
  train->add_option("--created-at", created_at, "timestamp stored in the model (default: now)");
  train->add_flag("--no-sa", no_sa, "skip simulated-annealing initialisation");
  add_seed(train);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score a model on a records CSV");
  std::string model;
  evaluate->add_option("--model", model)->required();
  evaluate->add_option("--data", data)->required();

  // muck
  auto* muck = app.add_subcommand("muck", "muck metrics from a sieve CSV");
  std::string metric, sieve;
  muck->add_option("metric", metric)->required()->check(CLI::IsMember({"ci", "mgs"}));
  muck->add_option("--sieve", sieve)->required();

  // recommend / surface
  std::string pr_model, ef_model, rock, cost_arg, grid_arg, baseline;
  auto add_models = [&](CLI::App* cmd) {
    cmd->add_option("--pr-model", pr_model)->required();
    cmd->add_option("--ef-model", ef_model)->required();
  };
  auto add_request = [&](CLI::App* cmd) {
    cmd->add_option("--rock", rock, "rock state JSON or file")->required();
    cmd->add_option("--cost", cost_arg, "cost parameter overrides (JSON or file)");
    cmd->add_option("--grid", grid_arg, "grid overrides (JSON or file)");
  };
  auto* recommend = app.add_subcommand("recommend", "minimum-cost thrust and torque");
  add_models(recommend);
  add_request(recommend);
  recommend->add_option("--baseline", baseline, "operator setting TH,TOR");
  auto* surface = app.add_subcommand("surface", "full cost surface");
  add_models(surface);
  add_request(surface);
  surface->add_option("--out", out);

  // replicate
  auto* replicate = app.add_subcommand("replicate", "in-silico field test");
  std::size_t n_seeds = 5;
  bool csv = false, truth = false;
  replicate->add_option("--seeds", n_seeds, "number of seeds (seed, seed+1, ...)")->capture_default_str();
  replicate->add_flag("--csv", csv, "CSV instead of a text table");
  replicate->add_flag("--truth", truth, "optimise over the ground truth instead of trained models");
  replicate->add_option("--out", out);
  add_seed(replicate);

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP service");
  std::string host = "127.0.0.1";
  int port = 8080;
  add_models(serve);
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*synth) {
      auto spec = preset == "prcr" ? tbm::ScenarioSpec::prcr(seed) : tbm::ScenarioSpec::ccr(seed);
      if (n) {
        spec.n_train = *n;
        spec.n_test = 0;
      }
      tbm::GroundTruth gt;
      gt.noise_sigma_pct = noise;
      const auto records = tbm::generate_dataset(spec, gt);
      emit(tbm::emit_records_csv(records), out);
      return kOk;
    }

    if (*train) {
      const auto records = tbm::parse_records_csv(tbm::read_file(data));
      const tbm::Target t = tbm::parse_target(target);
      tbm::TrainConfig cfg = t == tbm::Target::pr ? tbm::TrainConfig::prcr() : tbm::TrainConfig::ccr();
      const tbm::Architecture arch =
          t == tbm::Target::pr ? tbm::Architecture::prcr() : tbm::Architecture::ccr();
      cfg.seed = seed;
      cfg.simulated_annealing = !no_sa;
      if (folds == 0) folds = t == tbm::Target::pr ? 3 : 4;
      auto cv = tbm::cross_validate(records, t, folds, cfg, arch);
      cv.bundle.created_at = created_at.empty() ? utc_now() : created_at;
      tbm::write_file(model_out, tbm::save_model(cv.bundle));
      tbm::Json summary;
      summary["target"] = target;
      summary["folds"] = folds;
      summary["n_records"] = cv.bundle.training_meta.n_records;
      tbm::Json reports = tbm::Json::array();
      for (const auto& r : cv.reports) reports.push_back(tbm::to_json(r));
      summary["fold_reports"] = reports;
      summary["selected_fold"] = cv.selected_fold;
      summary["model"] = model_out;
      std::cout << tbm::canonical_dump(summary);
      return kOk;
    }

    if (*evaluate) {
      const auto bundle = tbm::load_model(tbm::read_file(model));
      const auto records = tbm::parse_records_csv(tbm::read_file(data));
      tbm::Json j;
      j["target"] = tbm::to_string(bundle.target);
      j["report"] = tbm::to_json(tbm::evaluate_bundle(bundle, records));
      std::cout << tbm::canonical_dump(j);
      return kOk;
    }

    if (*muck) {
      const auto samples = tbm::parse_sieve_csv(tbm::read_file(sieve));
      if (metric == "ci") {
        std::cout << "sample_id,ci\n";
        for (const auto& s : samples) std::printf("%s,%.6g\n", s.sample_id.c_str(), tbm::coarseness_index(s));
      } else {
        std::cout << "sample_id,mean_mm,d16_mm,d50_mm,d84_mm,clamped\n";
        for (const auto& s : samples) {
          const auto g = tbm::mean_grain_size(s);
          std::printf("%s,%.6g,%.6g,%.6g,%.6g,%s\n", s.sample_id.c_str(), g.mean_mm, g.d16_mm,
                      g.d50_mm, g.d84_mm, g.clamped ? "true" : "false");
        }
      }
      return kOk;
    }

    if (*recommend || *surface) {
      tbm::Service service(tbm::load_model(tbm::read_file(pr_model)),
                           tbm::load_model(tbm::read_file(ef_model)));
      tbm::Json req;
      req["rock"] = json_arg(rock, "rock");
      if (!cost_arg.empty()) req["cost"] = json_arg(cost_arg, "cost");
      if (!grid_arg.empty()) req["grid"] = json_arg(grid_arg, "grid");
      if (*recommend) {
        if (!baseline.empty()) {
          const auto comma = baseline.find(',');
          if (comma == std::string::npos) throw tbm::InvalidInput("baseline", "--baseline expects TH,TOR");
          try {
            req["baseline"] = {{"th", std::stod(baseline.substr(0, comma))},
                               {"tor", std::stod(baseline.substr(comma + 1))}};
          } catch (const std::logic_error&) {
            throw tbm::InvalidInput("baseline", "--baseline expects two numbers TH,TOR");
          }
        }
        return forward_response(service.handle("POST", "/api/v1/recommend", req.dump()));
      }
      const auto r = service.handle("POST", "/api/v1/surface", req.dump());
      if (r.status != 200 || out.empty()) return forward_response(r);
      tbm::write_file(out, r.body);
      return kOk;
    }

    if (*replicate) {
      std::vector<std::uint64_t> seeds;
      for (std::size_t i = 0; i < n_seeds; ++i) seeds.push_back(seed + i);
      tbm::ReplicationOptions opts;
      opts.truth_surrogates = truth;
      const auto report = tbm::replicate_field_test(tbm::GroundTruth{}, seeds, opts);
      emit(csv ? tbm::format_report_csv(report) : tbm::format_report(report), out);
      return kOk;
    }

    if (*serve) {
      tbm::Service service(tbm::load_model(tbm::read_file(pr_model)),
                           tbm::load_model(tbm::read_file(ef_model)));
      tbm::HttpServer server(service);
      const int bound = server.bind(host, port);
      std::cerr << "listening on " << host << ":" << bound << "\n";
      server.listen();
      return kOk;
    }
  } catch (const tbm::ValidationError& e) {
    for (const auto& fe : e.errors()) std::cerr << "error: " << fe.field << ": " << fe.message << "\n";
    return kValidation;
  } catch (const tbm::Error& e) {
    std::cerr << "error [" << tbm::to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
