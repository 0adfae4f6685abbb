#include "tbm/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "tbm/error.hpp"

namespace tbm {

const std::array<std::string, kRawFeatureCount>& raw_feature_names() {
  static const std::array<std::string, kRawFeatureCount> names = {
      "src", "ucs", "rqd", "cai", "q", "ci", "m", "th", "tor"};
  return names;
}

const std::array<std::string, kModelInputDim>& model_feature_names() {
  static const std::array<std::string, kModelInputDim> names = {
      "src_z", "rqd_z",  "cai_z", "q_z",   "pc_ucs_th", "pc_ci_m",
      "tor_z", "mgt_1", "mgt_2", "mgt_3", "mgt_4"};
  return names;
}

std::array<double, kRawFeatureCount> raw_features(const RockMassState& r,
                                                  const MachineSetting& m) {
  return {static_cast<double>(r.src), r.ucs, r.rqd, r.cai, r.q, r.ci, r.m, m.th, m.tor};
}

Pca2 pca_from_covariance(double saa, double sab, double sbb) {
  const double half_trace = 0.5 * (saa + sbb);
  const double half_diff = 0.5 * (saa - sbb);
  const double radius = std::hypot(half_diff, sab);
  Pca2 p;
  p.eigenvalues = {half_trace + radius, half_trace - radius};

  // Two algebraically equivalent eigenvector forms; take the better conditioned.
  const double l1 = p.eigenvalues[0];
  std::array<double, 2> u = {sab, l1 - saa};
  std::array<double, 2> v = {l1 - sbb, sab};
  auto norm = [](const std::array<double, 2>& w) { return std::hypot(w[0], w[1]); };
  std::array<double, 2> w = norm(u) >= norm(v) ? u : v;
  double len = norm(w);
  if (len == 0.0) {
    // Isotropic: every direction is principal.
    w = saa >= sbb ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
    len = 1.0;
  }
  w = {w[0] / len, w[1] / len};
  if (w[0] < 0 || (w[0] == 0 && w[1] < 0)) w = {-w[0], -w[1]};
  p.loading = w;
  return p;
}

Pca2 fit_pca2(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty())
    throw InvalidInput("pca", "PCA columns must be non-empty and of equal length");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double saa = 0, sab = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    saa += da * da;
    sab += da * db;
    sbb += db * db;
  }
  return pca_from_covariance(saa / n, sab / n, sbb / n);
}

std::array<double, 4> one_hot(int mgt) {
  if (mgt < 1 || mgt > 4) throw InvalidInput("mgt", "mgt must be in {1,2,3,4}");
  std::array<double, 4> v{};
  v[static_cast<std::size_t>(mgt - 1)] = 1.0;
  return v;
}

PreprocessorState fit_preprocessor(std::span<const TunnelingRecord> records) {
  if (records.size() < 2) throw InvalidInput("records", "need at least 2 records to fit");
  const std::size_t n = records.size();
  std::array<std::vector<double>, kRawFeatureCount> cols;
  for (auto& c : cols) c.reserve(n);
  for (const auto& rec : records) {
    const auto raw = raw_features(rec.rock, rec.machine);
    for (std::size_t j = 0; j < kRawFeatureCount; ++j) cols[j].push_back(raw[j]);
  }

  PreprocessorState st;
  for (std::size_t j = 0; j < kRawFeatureCount; ++j) {
    const auto& c = cols[j];
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : c) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0) || !std::isfinite(sd))
      throw InvalidInput(raw_feature_names()[j],
                         "column " + raw_feature_names()[j] + " is constant; cannot standardise");
    st.means[j] = mean;
    st.stds[j] = sd;
  }

  auto zcol = [&](std::size_t j) {
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = (cols[j][i] - st.means[j]) / st.stds[j];
    return z;
  };
  st.pca_ucs_th = fit_pca2(zcol(kUcs), zcol(kTh));
  st.pca_ci_m = fit_pca2(zcol(kCi), zcol(kM));
  return st;
}

std::vector<double> transform(const PreprocessorState& st, const RockMassState& rock,
                              const MachineSetting& machine) {
  const auto raw = raw_features(rock, machine);
  auto z = [&](std::size_t j) { return (raw[j] - st.means[j]) / st.stds[j]; };
  const auto hot = one_hot(rock.mgt);
  return {z(kSrc),
          z(kRqd),
          z(kCai),
          z(kQ),
          st.pca_ucs_th.score(z(kUcs), z(kTh)),
          st.pca_ci_m.score(z(kCi), z(kM)),
          z(kTor),
          hot[0],
          hot[1],
          hot[2],
          hot[3]};
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidInput("records", "pearson needs two equal-length columns of length >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::numeric_limits<double>::quiet_NaN();
  // The (n-1) factors of the sample covariance and deviations cancel.
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

CorrelationMatrix pearson_matrix(std::span<const TunnelingRecord> records) {
  if (records.size() < 3) throw InvalidInput("records", "need at least 3 records for correlation");
  static constexpr std::array<std::size_t, kCorrelationDim> kCols = {kUcs, kRqd, kCai, kQ,
                                                                     kCi,  kM,   kTh,  kTor};
  CorrelationMatrix out;
  std::array<std::vector<double>, kCorrelationDim> cols;
  for (const auto& rec : records) {
    const auto raw = raw_features(rec.rock, rec.machine);
    for (std::size_t j = 0; j < kCorrelationDim; ++j) cols[j].push_back(raw[kCols[j]]);
  }
  for (std::size_t j = 0; j < kCorrelationDim; ++j) out.names[j] = raw_feature_names()[kCols[j]];
  for (std::size_t a = 0; a < kCorrelationDim; ++a) {
    for (std::size_t b = a; b < kCorrelationDim; ++b) {
      double r = pearson(cols[a], cols[b]);
      if (a == b && !std::isnan(r)) r = 1.0;
      out.r[a][b] = out.r[b][a] = r;
      if (std::isnan(r)) out.undefined.emplace_back(a, b);
    }
  }
  return out;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(k, 0);
  for (auto f : assignments) ++sizes[f];
  return sizes;
}

std::vector<std::size_t> FoldPlan::members(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::complement(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) out.push_back(i);
  return out;
}

FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidInput("k", "fold count must be >= 2");
  if (k > n) throw InvalidInput("k", "fold count exceeds record count");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(n, 0);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) plan.assignments[order[pos++]] = f;
  }
  return plan;
}

}  // namespace tbm
