#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "support.hpp"
#include "tbm/error.hpp"
#include "tbm/preprocess.hpp"

namespace tbm {
namespace {

std::vector<TunnelingRecord> random_records(std::uint64_t seed, std::size_t n) {
  testing::Gen g(seed);
  std::vector<TunnelingRecord> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(g.record());
  return out;
}

// Brute-force 2x2 symmetric eigen-decomposition by scanning the angle.
std::array<double, 2> scan_eigenvalues(double a, double b, double c) {
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i <= 200000; ++i) {
    const double t = M_PI * i / 200000.0;
    const double x = std::cos(t), y = std::sin(t);
    const double q = a * x * x + 2 * b * x * y + c * y * y;
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  return {hi, lo};
}

TEST(OneHot, BasisVectors) {
  EXPECT_EQ(one_hot(1), (std::array<double, 4>{1, 0, 0, 0}));
  EXPECT_EQ(one_hot(2), (std::array<double, 4>{0, 1, 0, 0}));
  EXPECT_EQ(one_hot(3), (std::array<double, 4>{0, 0, 1, 0}));
  EXPECT_THROW(one_hot(0), InvalidInput);
  EXPECT_THROW(one_hot(5), InvalidInput);
}

TEST(Pearson, HandValues) {
  const std::vector<double> x = {1, 2, 3};
  EXPECT_DOUBLE_EQ(pearson(x, x), 1.0);
  EXPECT_NEAR(pearson(x, std::vector<double>{3, 2, 1}), -1.0, 1e-15);
  // cov = 1.5, sx = 1, sy = sqrt(7/3)
  EXPECT_NEAR(pearson(x, std::vector<double>{1, 2, 4}), 1.5 / std::sqrt(7.0 / 3.0), 1e-15);
  EXPECT_NEAR(pearson(x, std::vector<double>{1, 2, 4}), 0.982, 5e-4);
}

TEST(Pearson, MatrixMatchesDoubleLoop) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto recs = random_records(seed, 30);
    const auto m = pearson_matrix(recs);
    const std::size_t cols[] = {kUcs, kRqd, kCai, kQ, kCi, kM, kTh, kTor};
    for (std::size_t a = 0; a < 8; ++a) {
      for (std::size_t b = 0; b < 8; ++b) {
        double ma = 0, mb = 0;
        for (const auto& r : recs) {
          ma += raw_features(r.rock, r.machine)[cols[a]];
          mb += raw_features(r.rock, r.machine)[cols[b]];
        }
        ma /= 30;
        mb /= 30;
        double sab = 0, saa = 0, sbb = 0;
        for (const auto& r : recs) {
          const auto f = raw_features(r.rock, r.machine);
          sab += (f[cols[a]] - ma) * (f[cols[b]] - mb) / 29;
          saa += (f[cols[a]] - ma) * (f[cols[a]] - ma) / 29;
          sbb += (f[cols[b]] - mb) * (f[cols[b]] - mb) / 29;
        }
        EXPECT_NEAR(m.r[a][b], sab / std::sqrt(saa * sbb), 1e-12);
        EXPECT_DOUBLE_EQ(m.r[a][b], m.r[b][a]);
      }
      EXPECT_DOUBLE_EQ(m.r[a][a], 1.0);
    }
    EXPECT_TRUE(m.undefined.empty());
  }
}

TEST(Pearson, ConstantColumnFlagged) {
  auto recs = random_records(3, 10);
  for (auto& r : recs) r.rock.rqd = 50;
  const auto m = pearson_matrix(recs);
  EXPECT_TRUE(std::isnan(m.r[1][0]));
  EXPECT_FALSE(m.undefined.empty());
  EXPECT_THROW(pearson_matrix(std::span(recs).first(2)), InvalidInput);
}

TEST(Pca, IdenticalStandardisedColumns) {
  // Standardised to population unit variance, so the covariance is [[1,1],[1,1]].
  const std::vector<double> z = {-1.5, -0.5, 0.5, 1.5};
  const double sd = std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 4);
  std::vector<double> a;
  for (double v : z) a.push_back(v / sd);
  const auto p = fit_pca2(a, a);
  EXPECT_NEAR(p.loading[0], 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(p.loading[1], 1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(p.eigenvalues[0], 2.0, 1e-12);
  EXPECT_NEAR(p.eigenvalues[1], 0.0, 1e-12);
}

TEST(Pca, CorrelationMatrixEigenvalues) {
  for (double r : {-0.9, -0.3, 0.0, 0.2, 0.729, 0.835, 0.99}) {
    const auto p = pca_from_covariance(1, r, 1);
    const auto scan = scan_eigenvalues(1, r, 1);
    EXPECT_NEAR(p.eigenvalues[0], 1 + std::abs(r), 1e-12);
    EXPECT_NEAR(p.eigenvalues[1], 1 - std::abs(r), 1e-12);
    EXPECT_NEAR(p.eigenvalues[0], scan[0], 1e-8);
    EXPECT_NEAR(p.eigenvalues[1], scan[1], 1e-8);
  }
}

TEST(Pca, OrthonormalLoadingsAndTracePreserved) {
  testing::Gen g(77);
  for (int i = 0; i < 500; ++i) {
    const double a = g.uniform(0.01, 5), c = g.uniform(0.01, 5);
    const double b = g.uniform(-1, 1) * std::sqrt(a * c);
    const auto p = pca_from_covariance(a, b, c);
    const auto u = p.loading, v = p.minor_loading();
    EXPECT_NEAR(u[0] * u[0] + u[1] * u[1], 1.0, 1e-12);
    EXPECT_NEAR(u[0] * v[0] + u[1] * v[1], 0.0, 1e-12);
    EXPECT_GE(u[0], 0.0);
    EXPECT_NEAR(p.eigenvalues[0] + p.eigenvalues[1], a + c, 1e-9);
    EXPECT_GE(p.eigenvalues[0], p.eigenvalues[1]);
    // Rayleigh quotient of the loading reaches the larger eigenvalue.
    const double q = a * u[0] * u[0] + 2 * b * u[0] * u[1] + c * u[1] * u[1];
    EXPECT_NEAR(q, p.eigenvalues[0], 1e-9);
  }
}

TEST(Preprocessor, StandardisedColumnsHaveUnitSampleStd) {
  const auto recs = random_records(9, 50);
  const auto st = fit_preprocessor(recs);
  for (std::size_t j = 0; j < kRawFeatureCount; ++j) {
    double mean = 0, ss = 0;
    std::vector<double> z;
    for (const auto& r : recs) z.push_back((raw_features(r.rock, r.machine)[j] - st.means[j]) / st.stds[j]);
    for (double v : z) mean += v;
    mean /= static_cast<double>(z.size());
    for (double v : z) ss += (v - mean) * (v - mean);
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(ss / static_cast<double>(z.size() - 1)), 1.0, 1e-9);
  }
  EXPECT_EQ(st.output_dim, 11u);
}

TEST(Preprocessor, ConstantColumnNamed) {
  auto recs = random_records(4, 20);
  for (auto& r : recs) r.rock.cai = 2.0;
  try {
    fit_preprocessor(recs);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_EQ(e.field(), "cai");
  }
}

TEST(Preprocessor, TransformOfMeansIsZero) {
  const auto recs = random_records(12, 40);
  const auto st = fit_preprocessor(recs);
  RockMassState r;
  r.src = 3;
  r.ucs = st.means[kUcs];
  r.rqd = st.means[kRqd];
  r.cai = st.means[kCai];
  r.q = st.means[kQ];
  r.ci = st.means[kCi];
  r.m = st.means[kM];
  r.mgt = 1;
  // src is an integer column; shift the mean so its z-score is exactly zero too.
  PreprocessorState shifted = st;
  shifted.means[kSrc] = 3.0;
  const auto x = transform(shifted, r, {st.means[kTh], st.means[kTor]});
  for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(x[i], 0.0, 1e-12) << model_feature_names()[i];
  EXPECT_EQ(x[7], 1.0);
  EXPECT_EQ(x[8] + x[9] + x[10], 0.0);
}

TEST(Preprocessor, ThrustOnlyMovesItsComponent) {
  const auto recs = random_records(13, 40);
  const auto st = fit_preprocessor(recs);
  testing::Gen g(1);
  for (int i = 0; i < 50; ++i) {
    const auto rock = g.rock();
    const auto a = transform(st, rock, {3000, 800});
    const auto b = transform(st, rock, {g.uniform(2000, 10000), 800});
    for (std::size_t k = 0; k < a.size(); ++k)
      if (k != 4) EXPECT_EQ(a[k], b[k]) << model_feature_names()[k];
  }
}

TEST(KFold, FoldSizes) {
  EXPECT_EQ(kfold_split(160, 3, 1).fold_sizes(), (std::vector<std::size_t>{54, 53, 53}));
  EXPECT_EQ(kfold_split(90, 4, 1).fold_sizes(), (std::vector<std::size_t>{23, 23, 22, 22}));
}

TEST(KFold, DeterministicPartition) {
  testing::Gen g(99);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = static_cast<std::size_t>(g.integer(2, 300));
    const std::size_t k = static_cast<std::size_t>(g.integer(2, static_cast<int>(std::min<std::size_t>(n, 10))));
    const std::uint64_t seed = g.engine()();
    const auto plan = kfold_split(n, k, seed);
    EXPECT_EQ(plan.assignments, kfold_split(n, k, seed).assignments);
    const auto sizes = plan.fold_sizes();
    EXPECT_LE(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()), 1u);
    std::set<std::size_t> seen;
    for (std::size_t f = 0; f < k; ++f) {
      const auto m = plan.members(f);
      const auto c = plan.complement(f);
      EXPECT_EQ(m.size() + c.size(), n);
      for (auto idx : m) EXPECT_TRUE(seen.insert(idx).second);
    }
    EXPECT_EQ(seen.size(), n);
  }
}

TEST(KFold, RejectsBadFoldCounts) {
  EXPECT_THROW(kfold_split(3, 4, 0), InvalidInput);
  EXPECT_THROW(kfold_split(10, 1, 0), InvalidInput);
}

}  // namespace
}  // namespace tbm
