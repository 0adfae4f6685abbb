#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "support.hpp"
#include "tbm/error.hpp"
#include "tbm/model.hpp"
#include "tbm/synth.hpp"

namespace tbm {
namespace {

TrainConfig quick(std::uint64_t seed) {
  TrainConfig cfg = TrainConfig::prcr();
  cfg.sa_iterations = 30;
  cfg.gd_iterations = 150;
  cfg.seed = seed;
  return cfg;
}

std::vector<TunnelingRecord> pr_records(std::uint64_t seed, std::size_t n) {
  auto spec = ScenarioSpec::prcr(seed);
  spec.n_train = n;
  spec.n_test = 0;
  spec.target = SynthTarget::pr;
  return generate_dataset(spec, GroundTruth{});
}

TEST(FoldSelection, LowestMapeThenMaeThenIndex) {
  std::vector<EvalReport> r(4);
  r[0] = {5.0, 12.0, {}, 10};
  r[1] = {4.0, 11.0, {}, 10};
  r[2] = {3.0, 11.0, {}, 10};
  r[3] = {3.0, 11.0, {}, 10};
  EXPECT_EQ(select_best_fold(r), 2u);
  r[0].mape = 10.0;
  EXPECT_EQ(select_best_fold(r), 0u);
  EXPECT_THROW(select_best_fold(std::vector<EvalReport>{}), InvalidInput);
}

TEST(CrossValidation, DisjointHoldOutsCoverTheData) {
  const auto recs = pr_records(3, 160);
  const auto cv = cross_validate(recs, Target::pr, 3, quick(3), Architecture::prcr());
  ASSERT_EQ(cv.reports.size(), 3u);
  std::size_t total = 0;
  for (std::size_t f = 0; f < 3; ++f) {
    EXPECT_EQ(cv.reports[f].n, cv.plan.members(f).size());
    total += cv.reports[f].n;
  }
  EXPECT_EQ(total, 160u);
  EXPECT_EQ(cv.plan.fold_sizes(), (std::vector<std::size_t>{54, 53, 53}));
  double best = 1e300;
  for (const auto& r : cv.reports) best = std::min(best, r.mape);
  EXPECT_EQ(cv.bundle.training_meta.selected.mape, best);
  EXPECT_EQ(cv.reports[cv.selected_fold].mape, best);
  EXPECT_EQ(cv.bundle.training_meta.n_records, 160u);
  EXPECT_EQ(cv.bundle.training_meta.fold_reports, cv.reports);
}

TEST(CrossValidation, IdenticalFoldsGiveIdenticalReports) {
  const auto base = pr_records(4, 20);
  std::vector<TunnelingRecord> recs;
  FoldPlan plan;
  plan.k = 3;
  for (std::size_t f = 0; f < 3; ++f) {
    for (const auto& r : base) {
      recs.push_back(r);
      plan.assignments.push_back(f);
    }
  }
  const auto cv = cross_validate(recs, Target::pr, plan, quick(9), Architecture::prcr());
  EXPECT_EQ(cv.reports[0], cv.reports[1]);
  EXPECT_EQ(cv.reports[1], cv.reports[2]);
  EXPECT_EQ(cv.selected_fold, 0u);
}

TEST(CrossValidation, SkipsRecordsWithoutTheTarget) {
  auto recs = pr_records(5, 30);
  for (std::size_t i = 0; i < 6; ++i) {
    recs[i].pr.reset();
    recs[i].ef = 20.0;
  }
  const auto cv = cross_validate(recs, Target::pr, 3, quick(5), Architecture::prcr());
  EXPECT_EQ(cv.bundle.training_meta.n_records, 24u);
}

TEST(CrossValidation, DeterministicPerSeed) {
  const auto recs = pr_records(6, 60);
  const auto a = cross_validate(recs, Target::pr, 3, quick(1), Architecture::prcr());
  const auto b = cross_validate(recs, Target::pr, 3, quick(1), Architecture::prcr());
  EXPECT_EQ(a.bundle, b.bundle);
}

TEST(TunnelOrder, ChainageWhenComplete) {
  auto recs = pr_records(7, 5);
  recs[0].chainage = 40;
  recs[1].chainage = 10;
  recs[2].chainage = 30;
  recs[3].chainage = 20;
  recs[4].chainage = 0;
  EXPECT_EQ(tunnel_order(recs), (std::vector<std::size_t>{4, 1, 3, 2, 0}));
  recs[2].chainage.reset();
  EXPECT_EQ(tunnel_order(recs), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(Bundle, ValidationCatchesShapeMismatch) {
  const auto recs = pr_records(8, 30);
  auto b = cross_validate(recs, Target::pr, 3, quick(2), Architecture::prcr()).bundle;
  EXPECT_NO_THROW(validate(b));
  b.preprocessor.output_dim = 10;
  EXPECT_THROW(validate(b), InvalidInput);
}

}  // namespace
}  // namespace tbm
