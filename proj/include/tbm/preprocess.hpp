#pragma once

// Feature pipeline: z-score normalisation, PCA merging of the correlated
// (UCS, thrust) and (CI, M) pairs, one-hot muck geometry, correlation
// reporting and k-fold splitting.
//
// Model input layout (11 features):
//   src_z, rqd_z, cai_z, q_z, pc_ucs_th, pc_ci_m, tor_z, mgt_1..mgt_4

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tbm/domain.hpp"

namespace tbm {

inline constexpr std::size_t kRawFeatureCount = 9;
inline constexpr std::size_t kModelInputDim = 11;

// Raw numeric features in storage order for means/stds.
enum RawFeature : std::size_t { kSrc, kUcs, kRqd, kCai, kQ, kCi, kM, kTh, kTor };

const std::array<std::string, kRawFeatureCount>& raw_feature_names();
const std::array<std::string, kModelInputDim>& model_feature_names();

std::array<double, kRawFeatureCount> raw_features(const RockMassState& rock,
                                                  const MachineSetting& machine);

// First principal component of a standardised feature pair.
struct Pca2 {
  std::array<double, 2> loading{};      // unit norm, loading[0] >= 0
  std::array<double, 2> eigenvalues{};  // descending

  std::array<double, 2> minor_loading() const { return {-loading[1], loading[0]}; }
  double score(double a, double b) const { return loading[0] * a + loading[1] * b; }
  bool operator==(const Pca2&) const = default;
};

// Eigen-decomposition of the symmetric 2x2 matrix [[saa, sab], [sab, sbb]].
Pca2 pca_from_covariance(double saa, double sab, double sbb);

// PCA of two columns using the population (1/n) covariance.
Pca2 fit_pca2(std::span<const double> a, std::span<const double> b);

struct PreprocessorState {
  std::array<std::string, kModelInputDim> feature_names = model_feature_names();
  std::array<double, kRawFeatureCount> means{};
  std::array<double, kRawFeatureCount> stds{};  // sample (n-1) standard deviations
  Pca2 pca_ucs_th;
  Pca2 pca_ci_m;
  std::size_t output_dim = kModelInputDim;

  bool operator==(const PreprocessorState&) const = default;
};

std::array<double, 4> one_hot(int mgt);

// Throws InvalidInput naming the first constant column.
PreprocessorState fit_preprocessor(std::span<const TunnelingRecord> records);

std::vector<double> transform(const PreprocessorState& state, const RockMassState& rock,
                              const MachineSetting& machine);

inline constexpr std::size_t kCorrelationDim = 8;

// Pearson correlation (sample statistics) over UCS, RQD, CAI, q, CI, M, Th, Tor.
// Pairs involving a constant column are NaN and listed in `undefined`.
struct CorrelationMatrix {
  std::array<std::string, kCorrelationDim> names;
  std::array<std::array<double, kCorrelationDim>, kCorrelationDim> r{};
  std::vector<std::pair<std::size_t, std::size_t>> undefined;
};

CorrelationMatrix pearson_matrix(std::span<const TunnelingRecord> records);

double pearson(std::span<const double> x, std::span<const double> y);

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // fold index per record
  std::uint64_t seed = 0;

  std::vector<std::size_t> fold_sizes() const;
  std::vector<std::size_t> members(std::size_t fold) const;
  std::vector<std::size_t> complement(std::size_t fold) const;
};

// Seeded shuffle, then contiguous folds; the first n % k folds get one extra.
FoldPlan kfold_split(std::size_t n, std::size_t k, std::uint64_t seed);

}  // namespace tbm
