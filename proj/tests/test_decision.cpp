#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "tbm/decision.hpp"
#include "tbm/error.hpp"
#include "tbm/synth.hpp"

namespace tbm {
namespace {

// Hand-written reference objective, same operation order as the library.
double reference_cost(double pr, double ef, double c1 = 30000, double c2 = 350000) {
  const double d = 6.0, w = 25.0, t = 10.0, l = 1.0;
  return c1 * std::numbers::pi * d * d * l / (4.0 * ef * w) + c2 * l / (pr * 0.06 * t);
}

struct Oracle {
  double th = 0, tor = 0, cost = 0;
};

// Exhaustive double loop over the default grid, written independently of
// grid_points() and cost_surface().
Oracle brute_force(const RockMassState& rock, const Predictor& pr, const Predictor& ef) {
  Oracle best{0, 0, 1e300};
  for (int i = 0; i <= 80; ++i) {
    for (int j = 0; j <= 26; ++j) {
      const MachineSetting m{2000.0 + 100.0 * i, 200.0 + 50.0 * j};
      const double p = pr(rock, m), e = ef(rock, m);
      if (!(p > 0) || !(e > 0)) continue;
      const double c = reference_cost(p, e);
      if (c < best.cost) best = {m.th, m.tor, c};
    }
  }
  return best;
}

TEST(Cost, TableRows) {
  const CostParams p;
  EXPECT_NEAR(cost(68.04, 45.21, p).total, 9323.98, 1.0);
  EXPECT_NEAR(cost(60.42, 38.63, p).total, 10532.5, 0.5);
  EXPECT_NEAR(cost(70.74, 40.22, p).total, 9089.32, 1.0);
  EXPECT_NEAR(cost(68.98, 32.03, p).total, 9515.31, 1.0);
  const auto c = cost(68.04, 45.21, p);
  EXPECT_NEAR(c.cutter, 750.5, 0.1);
  EXPECT_NEAR(c.period, 8573.4, 0.1);
}

TEST(Cost, DoublingC2DoublesOnlyThePeriodTerm) {
  CostParams p, q;
  q.c2 = 2 * p.c2;
  const auto a = cost(55, 30, p), b = cost(55, 30, q);
  EXPECT_DOUBLE_EQ(b.period, 2 * a.period);
  EXPECT_DOUBLE_EQ(b.cutter, a.cutter);
}

TEST(Cost, InfeasibleInputs) {
  EXPECT_THROW(cost(0, 30, {}), InfeasiblePoint);
  EXPECT_THROW(cost(40, -1, {}), InfeasiblePoint);
}

TEST(Cost, StrictlyDecreasingInBothRates) {
  testing::Gen g(31);
  for (int i = 0; i < 1000; ++i) {
    const double pr = g.uniform(1, 150), ef = g.uniform(1, 80), d = g.uniform(0.01, 10);
    const double c = cost(pr, ef, {}).total;
    EXPECT_LT(cost(pr + d, ef, {}).total, c);
    EXPECT_LT(cost(pr, ef + d, {}).total, c);
  }
}

TEST(Cost, DecompositionSums) {
  testing::Gen g(32);
  for (int i = 0; i < 1000; ++i) {
    const auto c = cost(g.uniform(1, 150), g.uniform(1, 80), {});
    EXPECT_NEAR(c.total, c.cutter + c.period, 1e-9);
  }
}

TEST(CostParams, Validation) {
  CostParams p;
  p.w_max = 0;
  EXPECT_THROW(validate(p), InvalidInput);
}

TEST(Grid, DefaultCensus) {
  const auto pts = grid_points({});
  ASSERT_EQ(pts.size(), 2187u);
  EXPECT_EQ(pts.front(), (MachineSetting{2000, 200}));
  EXPECT_EQ(pts.back(), (MachineSetting{10000, 1500}));
  EXPECT_EQ(pts[1], (MachineSetting{2000, 250}));
  EXPECT_EQ(pts[27], (MachineSetting{2100, 200}));
}

TEST(Grid, DegenerateInterval) {
  GridSpec g{2000, 2000, 100, 200, 200, 50};
  const auto pts = grid_points(g);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0], (MachineSetting{2000, 200}));
}

TEST(Grid, Validation) {
  GridSpec g;
  g.th_step = 0;
  EXPECT_THROW(validate(g), InvalidInput);
  g = {};
  g.tor_max = 100;
  EXPECT_THROW(validate(g), InvalidInput);
}

TEST(Grid, SnapAndMembership) {
  const GridSpec g;
  EXPECT_TRUE(on_grid({6100, 750}, g));
  EXPECT_FALSE(on_grid({6183.67, 749.67}, g));
  EXPECT_EQ(snap_to_grid({6183.67, 749.67}, g), (MachineSetting{6200, 750}));
  EXPECT_EQ(snap_to_grid({50000, 10}, g), (MachineSetting{10000, 200}));
}

TEST(Optimize, ConstantSurrogatesTieBreakToFirstPoint) {
  const RockMassState rock = field_test_rock(2);
  const Predictor pr = [](const auto&, const auto&) { return 60.0; };
  const Predictor ef = [](const auto&, const auto&) { return 40.0; };
  const auto rec = optimize(rock, pr, ef, {}, {});
  EXPECT_EQ(rec.th, 2000.0);
  EXPECT_EQ(rec.tor, 200.0);
  EXPECT_EQ(rec.feasible_fraction, 1.0);
  EXPECT_DOUBLE_EQ(rec.cost, cost(60, 40, {}).total);
}

TEST(Optimize, MatchesBruteForceOverGroundTruth) {
  testing::Gen g(41);
  for (int i = 0; i < 20; ++i) {
    const auto rock = g.rock();
    const auto rec = optimize(rock, pr_truth, ef_truth, {}, {});
    const auto oracle = brute_force(rock, pr_truth, ef_truth);
    EXPECT_EQ(rec.th, oracle.th);
    EXPECT_EQ(rec.tor, oracle.tor);
    EXPECT_NEAR(rec.cost, oracle.cost, 1e-9);
  }
}

TEST(Optimize, NeverWorseThanAnySampledPoint) {
  testing::Gen g(42);
  // A surrogate with an interior optimum so the check is not trivially at a corner.
  const Predictor pr = [](const RockMassState& r, const MachineSetting& m) {
    return 20 + 60 * (1 - std::exp(-m.th / (30 * r.ucs))) + m.tor / 100;
  };
  const Predictor ef = [](const RockMassState&, const MachineSetting& m) {
    return 60 - 3e-7 * m.th * m.th - 1e-5 * m.tor * m.tor;
  };
  const auto pts = grid_points({});
  for (int i = 0; i < 10; ++i) {
    const auto rock = g.rock();
    const auto rec = optimize(rock, pr, ef, {}, {});
    for (int k = 0; k < 200; ++k) {
      const auto& m = pts[static_cast<std::size_t>(g.integer(0, 2186))];
      const double c = cost(pr(rock, m), ef(rock, m), {}).total;
      EXPECT_LE(rec.cost, c + 1e-9);
    }
  }
}

TEST(Optimize, ScalingCostCoefficientsKeepsTheArgmin) {
  testing::Gen g(43);
  for (int i = 0; i < 10; ++i) {
    const auto rock = g.rock();
    const auto base = cost_surface(rock, pr_truth, ef_truth, {}, {});
    for (double lambda : {0.25, 2.0, 1024.0}) {
      CostParams p;
      p.c1 *= lambda;
      p.c2 *= lambda;
      const auto s = cost_surface(rock, pr_truth, ef_truth, p, {});
      EXPECT_EQ(s.optimum_th, base.optimum_th);
      EXPECT_EQ(s.optimum_tor, base.optimum_tor);
      for (std::size_t a = 0; a < s.cost.size(); ++a)
        for (std::size_t b = 0; b < s.cost[a].size(); ++b) EXPECT_EQ(s.cost[a][b], lambda * base.cost[a][b]);
    }
  }
}

TEST(Optimize, InfeasiblePointsExcludedAndReported) {
  const auto rock = field_test_rock(3);
  // Negative PR below 6000 kN.
  const Predictor pr = [](const auto&, const MachineSetting& m) { return m.th < 6000 ? -1.0 : 50.0; };
  const Predictor ef = [](const auto&, const MachineSetting& m) { return 10 + m.tor / 100; };
  const auto rec = optimize(rock, pr, ef, {}, {});
  EXPECT_EQ(rec.th, 6000.0);
  EXPECT_EQ(rec.tor, 1500.0);
  EXPECT_NEAR(rec.feasible_fraction, 41.0 / 81.0, 1e-15);
}

TEST(Optimize, NothingFeasible) {
  const Predictor bad = [](const auto&, const auto&) { return 0.0; };
  try {
    optimize(field_test_rock(2), bad, bad, {}, {});
    FAIL();
  } catch (const NoFeasiblePoint& e) {
    EXPECT_EQ(e.feasible_fraction(), 0.0);
    EXPECT_EQ(e.code(), ErrorCode::no_feasible_point);
  }
}

TEST(Surface, ShapeAndConsistencyWithOptimize) {
  const auto rock = field_test_rock(4);
  const auto s = cost_surface(rock, pr_truth, ef_truth, {}, {});
  ASSERT_EQ(s.cost.size(), 81u);
  for (const auto& row : s.cost) EXPECT_EQ(row.size(), 27u);
  const auto rec = optimize(rock, pr_truth, ef_truth, {}, {});
  EXPECT_EQ(s.th_values[s.optimum_th], rec.th);
  EXPECT_EQ(s.tor_values[s.optimum_tor], rec.tor);
  EXPECT_EQ(s.cost[s.optimum_th][s.optimum_tor], rec.cost);
  EXPECT_EQ(rec, recommendation_from_surface(s, {}));
}

}  // namespace
}  // namespace tbm
