#include "tbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tbm/error.hpp"

namespace tbm {

double ModelBundle::predict(const RockMassState& rock, const MachineSetting& machine) const {
  const auto x = transform(preprocessor, rock, machine);
  return target_scaler.from_z(forward(network, x));
}

void validate(const ModelBundle& b) {
  if (b.schema_version != kSchemaVersion) throw UnsupportedVersion(b.schema_version);
  validate(b.network);
  if (b.preprocessor.output_dim != b.network.input_dim)
    throw InvalidInput("network", "preprocessor output_dim does not match network input_dim");
  for (double s : b.preprocessor.stds)
    if (!(s > 0) || !std::isfinite(s))
      throw InvalidInput("preprocessor", "standard deviations must be positive");
  if (!std::isfinite(b.target_scaler.mean) || !std::isfinite(b.target_scaler.std) ||
      b.target_scaler.std < 0)
    throw InvalidInput("target_scaler", "target scaler must be finite with std >= 0");
  auto finite_report = [](const EvalReport& r) {
    return std::isfinite(r.mae) && std::isfinite(r.mape) &&
           (!r.trend_accuracy || std::isfinite(*r.trend_accuracy));
  };
  if (!finite_report(b.training_meta.selected))
    throw InvalidInput("training_meta", "selected metrics must be finite");
  for (const auto& r : b.training_meta.fold_reports)
    if (!finite_report(r)) throw InvalidInput("training_meta", "fold metrics must be finite");
}

std::size_t select_best_fold(std::span<const EvalReport> reports) {
  if (reports.empty()) throw InvalidInput("reports", "no fold reports to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto& a = reports[i];
    const auto& b = reports[best];
    if (a.mape < b.mape || (a.mape == b.mape && a.mae < b.mae)) best = i;
  }
  return best;
}

std::vector<std::size_t> tunnel_order(std::span<const TunnelingRecord> records) {
  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const bool all_chainage =
      std::all_of(records.begin(), records.end(), [](const auto& r) { return r.chainage.has_value(); });
  if (all_chainage) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return *records[a].chainage < *records[b].chainage;
    });
  }
  return idx;
}

namespace {

Samples to_samples(const PreprocessorState& st, std::span<const TunnelingRecord> records,
                   std::span<const std::size_t> idx, Target target) {
  Samples s(st.output_dim);
  for (std::size_t i : idx) {
    const auto& rec = records[i];
    s.push(transform(st, rec.rock, rec.machine), *rec.target(target));
  }
  return s;
}

}  // namespace

CrossValidation cross_validate(std::span<const TunnelingRecord> records, Target target,
                               std::size_t k, const TrainConfig& cfg, const Architecture& arch) {
  std::size_t usable = 0;
  for (const auto& r : records)
    if (r.target(target)) ++usable;
  return cross_validate(records, target, kfold_split(usable, k, cfg.seed), cfg, arch);
}

CrossValidation cross_validate(std::span<const TunnelingRecord> all_records, Target target,
                               const FoldPlan& plan, const TrainConfig& cfg,
                               const Architecture& arch) {
  validate(cfg);
  std::vector<TunnelingRecord> records;
  for (const auto& r : all_records)
    if (r.target(target)) records.push_back(r);
  if (plan.assignments.size() != records.size())
    throw InvalidInput("folds", "fold plan does not cover the records carrying the target");
  if (plan.k < 2) throw InvalidInput("k", "fold count must be >= 2");
  if (arch.input_dim != kModelInputDim)
    throw InvalidInput("arch", "network input_dim must equal the model input dimension");

  CrossValidation cv;
  cv.plan = plan;
  std::vector<ModelBundle> bundles;
  for (std::size_t fold = 0; fold < plan.k; ++fold) {
    const auto train_idx = plan.complement(fold);
    auto held_out = plan.members(fold);
    if (held_out.empty() || train_idx.size() < 2)
      throw InvalidInput("folds", "each fold needs held-out records and >= 2 training records");

    std::vector<TunnelingRecord> train_records;
    for (std::size_t i : train_idx) train_records.push_back(records[i]);
    std::vector<TunnelingRecord> held_records;
    for (std::size_t i : held_out) held_records.push_back(records[i]);
    const auto order = tunnel_order(held_records);
    std::vector<std::size_t> val_idx;
    for (std::size_t o : order) val_idx.push_back(held_out[o]);

    const PreprocessorState st = fit_preprocessor(train_records);
    const Samples train = to_samples(st, records, train_idx, target);
    const Samples val = to_samples(st, records, val_idx, target);
    TrainOutcome outcome = train_sa_bpnn(train, val, cfg, arch);

    ModelBundle b;
    b.target = target;
    b.preprocessor = st;
    b.network = std::move(outcome.surrogate.net);
    b.target_scaler = outcome.surrogate.scaler;
    cv.reports.push_back(outcome.validation);
    cv.train_mse.push_back(outcome.train_mse);
    bundles.push_back(std::move(b));
  }

  cv.selected_fold = select_best_fold(cv.reports);
  cv.bundle = std::move(bundles[cv.selected_fold]);
  auto& meta = cv.bundle.training_meta;
  meta.seed = cfg.seed;
  meta.config = cfg;
  meta.architecture = arch;
  meta.folds = plan.k;
  meta.n_records = records.size();
  meta.fold_reports = cv.reports;
  meta.selected_fold = cv.selected_fold;
  meta.selected = cv.reports[cv.selected_fold];
  return cv;
}

EvalReport evaluate_bundle(const ModelBundle& bundle, std::span<const TunnelingRecord> records) {
  std::vector<TunnelingRecord> usable;
  for (const auto& r : records)
    if (r.target(bundle.target)) usable.push_back(r);
  if (usable.empty())
    throw InvalidInput(to_string(bundle.target), "no records carry the model's target");
  std::vector<double> pred;
  std::vector<double> truth;
  for (std::size_t i : tunnel_order(usable)) {
    pred.push_back(bundle.predict(usable[i].rock, usable[i].machine));
    truth.push_back(*usable[i].target(bundle.target));
  }
  return evaluate(pred, truth, true);
}

}  // namespace tbm
