#pragma once

// Synthetic ground truth, dataset generation and the in-silico field test.
//
// The ground-truth response functions are fixed repository constants; they
// stand in for the unavailable field data so every downstream number is
// reproducible.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tbm/decision.hpp"
#include "tbm/domain.hpp"

namespace tbm {

// 90 (1 - exp(-th / (40 ucs))) (0.6 + 0.4 tor/1500) (0.7 + 0.3 rqd/100) mf(mgt)
double pr_truth(const RockMassState& rock, const MachineSetting& machine);

// 8 + 55 exp(-cai/4) exp(-q/300) (1 - 0.45 th/10000) (1 - 0.25 tor/1500)
double ef_truth(const RockMassState& rock, const MachineSetting& machine);

struct GroundTruth {
  Predictor pr_fn = pr_truth;
  Predictor ef_fn = ef_truth;
  double noise_sigma_pct = 8.0;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

enum class SynthTarget { pr, ef, both };

struct ScenarioSpec {
  Range ucs, rqd, cai, q, ci, m, th, tor;
  // Class weights for SRC II..V.
  std::vector<double> src_weights = {0.05, 0.38, 0.52, 0.05};
  // Correlation of the Gaussian copula coupling the (UCS, Th) and (CI, M)
  // pairs; marginals stay uniform on their ranges.
  double ucs_th_copula = 0.729;
  double ci_m_copula = 0.835;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
  SynthTarget target = SynthTarget::both;
  double chainage_start = 0.0;
  double chainage_step = 1.5;

  std::size_t total() const { return n_train + n_test; }

  // Penetration-rate records over the PRCR parameter envelope (160 + 40).
  static ScenarioSpec prcr(std::uint64_t seed);
  // Cutter-life records over the CCR parameter envelope (90 + 18).
  static ScenarioSpec ccr(std::uint64_t seed);
};

void validate(const ScenarioSpec& spec);

// Uniform inputs, targets = truth * (1 + N(0, sigma/100)); records in
// increasing chainage. Deterministic per spec.seed.
std::vector<TunnelingRecord> generate_dataset(const ScenarioSpec& spec, const GroundTruth& gt);

// The rock state averaged over the verification section, with the given
// muck geometry type.
RockMassState field_test_rock(int mgt);

// Operator settings used before optimisation, per muck geometry type 2..4.
MachineSetting operator_baseline(int mgt);

struct FieldComparison {
  int mgt = 0;
  MachineSetting baseline;
  MachineSetting recommended;
  double pr_before = 0.0, pr_after = 0.0;
  double ef_before = 0.0, ef_after = 0.0;
  double cost_before = 0.0, cost_after = 0.0;

  double pr_change_pct() const { return 100.0 * (pr_after - pr_before) / pr_before; }
  double ef_change_pct() const { return 100.0 * (ef_after - ef_before) / ef_before; }
  // Positive when the cost fell.
  double cost_reduction_pct() const { return 100.0 * (cost_before - cost_after) / cost_before; }
};

struct FieldTestRun {
  std::uint64_t seed = 0;
  std::vector<FieldComparison> rows;  // Mgt 2, 3, 4
  std::optional<double> pr_test_mape;
  std::optional<double> ef_test_mape;

  // Means of the per-Mgt rates.
  double avg_pr_change_pct() const;
  double avg_ef_change_pct() const;
  double avg_cost_reduction_pct() const;
};

struct FieldTestReport {
  std::vector<FieldTestRun> runs;

  double median_pr_change_pct() const;
  double median_ef_change_pct() const;
  double median_cost_reduction_pct() const;
};

struct ReplicationOptions {
  CostParams cost;
  GridSpec grid;
  // Skip training and optimise directly over the ground truth.
  bool truth_surrogates = false;
};

// Trains PR (3-fold) and Ef (4-fold) models per seed on generated data, then
// compares ground-truth PR, Ef and cost at the operator baseline and at the
// recommendation for Mgt 2, 3 and 4.
FieldTestReport replicate_field_test(const GroundTruth& gt, const std::vector<std::uint64_t>& seeds,
                                     const ReplicationOptions& opts = {});

// Text table in before/after/rate layout, one block per seed plus medians.
std::string format_report(const FieldTestReport& report);
std::string format_report_csv(const FieldTestReport& report);

double median(std::vector<double> v);

}  // namespace tbm
