#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tbm/domain.hpp"
#include "tbm/preprocess.hpp"
#include "tbm/sabpnn.hpp"

namespace tbm {

inline constexpr const char* kSchemaVersion = "1";

struct TrainingMeta {
  std::uint64_t seed = 0;
  TrainConfig config;
  Architecture architecture;
  std::size_t folds = 0;
  std::size_t n_records = 0;
  std::vector<EvalReport> fold_reports;
  std::size_t selected_fold = 0;
  EvalReport selected;

  bool operator==(const TrainingMeta&) const = default;
};

// Everything needed to turn a (rock, machine) pair into a physical-unit
// prediction for one target.
struct ModelBundle {
  std::string schema_version = kSchemaVersion;
  Target target = Target::pr;
  PreprocessorState preprocessor;
  NetworkParams network;
  TargetScaler target_scaler;
  TrainingMeta training_meta;
  std::string created_at;

  double predict(const RockMassState& rock, const MachineSetting& machine) const;
  bool operator==(const ModelBundle&) const = default;
};

// Shape and metric consistency; throws InvalidInput.
void validate(const ModelBundle& bundle);

struct CrossValidation {
  FoldPlan plan;
  std::vector<EvalReport> reports;    // one per fold, on the held-out fold
  std::vector<double> train_mse;      // final normalised training loss per fold
  std::size_t selected_fold = 0;
  ModelBundle bundle;                 // the selected fold's model
};

// Index of the report with the lowest MAPE; ties go to lower MAE, then to the
// lower fold index.
std::size_t select_best_fold(std::span<const EvalReport> reports);

// Trains one model per held-out fold. Records lacking the target are skipped.
// Every fold trains with cfg.seed, so folds differ only in their data.
CrossValidation cross_validate(std::span<const TunnelingRecord> records, Target target,
                               std::size_t k, const TrainConfig& cfg, const Architecture& arch);

CrossValidation cross_validate(std::span<const TunnelingRecord> records, Target target,
                               const FoldPlan& plan, const TrainConfig& cfg,
                               const Architecture& arch);

// Predictions for `records` in tunnel order (chainage when every record has
// one, otherwise input order), evaluated against the bundle's target.
EvalReport evaluate_bundle(const ModelBundle& bundle, std::span<const TunnelingRecord> records);

// Indices of `records` sorted into tunnel order.
std::vector<std::size_t> tunnel_order(std::span<const TunnelingRecord> records);

}  // namespace tbm
