#include "tbm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "tbm/error.hpp"
#include "tbm/model.hpp"

namespace tbm {

double pr_truth(const RockMassState& r, const MachineSetting& m) {
  static constexpr double kMuckFactor[] = {0.0, 0.9, 1.0, 1.05, 0.95};
  const double mf = kMuckFactor[std::clamp(r.mgt, 1, 4)];
  return 90.0 * (1.0 - std::exp(-m.th / (40.0 * r.ucs))) * (0.6 + 0.4 * m.tor / 1500.0) *
         (0.7 + 0.3 * r.rqd / 100.0) * mf;
}

double ef_truth(const RockMassState& r, const MachineSetting& m) {
  return 8.0 + 55.0 * std::exp(-r.cai / 4.0) * std::exp(-r.q / 300.0) *
                   (1.0 - 0.45 * m.th / 10000.0) * (1.0 - 0.25 * m.tor / 1500.0);
}

ScenarioSpec ScenarioSpec::prcr(std::uint64_t seed) {
  ScenarioSpec s;
  s.ucs = {30.35, 149.03};
  s.rqd = {5.00, 93.01};
  s.cai = {2.13, 5.32};
  s.q = {50.38, 95.21};
  s.ci = {257.09, 590.30};
  s.m = {1.35, 30.47};
  s.th = {2105.16, 9127.08};
  s.tor = {222.49, 1327.25};
  s.n_train = 160;
  s.n_test = 40;
  s.seed = seed;
  s.target = SynthTarget::pr;
  return s;
}

ScenarioSpec ScenarioSpec::ccr(std::uint64_t seed) {
  ScenarioSpec s;
  s.ucs = {36.81, 149.03};
  s.rqd = {6.52, 90.35};
  s.cai = {2.12, 4.52};
  s.q = {43.82, 93.40};
  s.ci = {229.78, 507.77};
  s.m = {1.78, 36.24};
  s.th = {2543.61, 9127.08};
  s.tor = {245.97, 1281.82};
  s.n_train = 90;
  s.n_test = 18;
  s.seed = seed;
  s.target = SynthTarget::ef;
  return s;
}

void validate(const ScenarioSpec& s) {
  auto check = [](const Range& r, const char* field, double lo, double hi, bool open_lo) {
    const bool ok = std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi &&
                    (open_lo ? r.lo > lo : r.lo >= lo) && r.hi <= hi;
    if (!ok) throw InvalidInput(field, std::string("impossible sampling range for ") + field);
  };
  constexpr double inf = std::numeric_limits<double>::infinity();
  check(s.ucs, "ucs", 0.0, inf, true);
  check(s.rqd, "rqd", 0.0, 100.0, false);
  check(s.cai, "cai", 0.0, inf, true);
  check(s.q, "q", 0.0, 100.0, false);
  check(s.ci, "ci", 0.0, 100.0 * kDefaultSieveCount, false);
  check(s.m, "m", 0.0, inf, true);
  check(s.th, "th", 0.0, inf, true);
  check(s.tor, "tor", 0.0, inf, true);
  if (s.total() == 0) throw InvalidInput("n", "record count must be > 0");
  if (s.src_weights.size() != 4) throw InvalidInput("src_weights", "need one weight per class II-V");
  double wsum = 0.0;
  for (double w : s.src_weights) {
    if (!(w >= 0)) throw InvalidInput("src_weights", "weights must be >= 0");
    wsum += w;
  }
  if (!(wsum > 0)) throw InvalidInput("src_weights", "weights must not all be zero");
  if (!(std::abs(s.ucs_th_copula) < 1) || !(std::abs(s.ci_m_copula) < 1))
    throw InvalidInput("copula", "copula correlation must lie in (-1, 1)");
}

namespace {

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double lerp(const Range& r, double u) { return r.lo + u * (r.hi - r.lo); }

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::vector<TunnelingRecord> generate_dataset(const ScenarioSpec& spec, const GroundTruth& gt) {
  validate(spec);
  if (!(gt.noise_sigma_pct >= 0) || !std::isfinite(gt.noise_sigma_pct))
    throw InvalidInput("noise", "noise level must be >= 0");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::discrete_distribution<int> src_class(spec.src_weights.begin(), spec.src_weights.end());
  std::uniform_int_distribution<int> muck(1, 4);

  auto coupled = [&](double rho) {
    const double z1 = gauss(rng);
    const double z2 = rho * z1 + std::sqrt(1.0 - rho * rho) * gauss(rng);
    return std::pair{std_normal_cdf(z1), std_normal_cdf(z2)};
  };
  auto noisy = [&](double truth) {
    if (gt.noise_sigma_pct == 0.0) return truth;
    for (;;) {
      const double v = truth * (1.0 + gauss(rng) * gt.noise_sigma_pct / 100.0);
      if (v > 0) return v;
    }
  };

  std::vector<TunnelingRecord> out;
  out.reserve(spec.total());
  while (out.size() < spec.total()) {
    TunnelingRecord rec;
    const auto [u_ucs, u_th] = coupled(spec.ucs_th_copula);
    const auto [u_ci, u_m] = coupled(spec.ci_m_copula);
    rec.rock.src = 2 + src_class(rng);
    rec.rock.ucs = lerp(spec.ucs, u_ucs);
    rec.rock.rqd = lerp(spec.rqd, unit(rng));
    rec.rock.cai = lerp(spec.cai, unit(rng));
    rec.rock.q = lerp(spec.q, unit(rng));
    rec.rock.ci = lerp(spec.ci, u_ci);
    rec.rock.m = lerp(spec.m, u_m);
    rec.rock.mgt = muck(rng);
    rec.machine.th = lerp(spec.th, u_th);
    rec.machine.tor = lerp(spec.tor, unit(rng));
    if (spec.target != SynthTarget::ef) rec.pr = noisy(gt.pr_fn(rec.rock, rec.machine));
    if (spec.target != SynthTarget::pr) rec.ef = noisy(gt.ef_fn(rec.rock, rec.machine));
    try {
      validate(rec);
    } catch (const InvalidInput&) {
      continue;  // resample
    }
    rec.chainage = spec.chainage_start + spec.chainage_step * static_cast<double>(out.size());
    out.push_back(std::move(rec));
  }
  return out;
}

RockMassState field_test_rock(int mgt) {
  RockMassState r;
  r.src = 3;
  r.ucs = 78.43;
  r.rqd = 35.17;
  r.cai = 3.28;
  r.q = 75.14;
  r.ci = 432.92;
  r.m = 12.69;
  r.mgt = mgt;
  validate(r);
  return r;
}

MachineSetting operator_baseline(int mgt) {
  switch (mgt) {
    case 2: return {6183.67, 749.67};
    case 3: return {5068.45, 780.72};
    case 4: return {6201.41, 861.32};
    default: throw InvalidInput("mgt", "operator baselines exist for mgt 2, 3 and 4 only");
  }
}

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidInput("values", "median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

template <class F>
double mean_of(const std::vector<FieldComparison>& rows, F f) {
  double acc = 0.0;
  for (const auto& r : rows) acc += f(r);
  return rows.empty() ? 0.0 : acc / static_cast<double>(rows.size());
}

template <class F>
double median_of(const std::vector<FieldTestRun>& runs, F f) {
  std::vector<double> v;
  for (const auto& r : runs) v.push_back(f(r));
  return median(std::move(v));
}

}  // namespace

double FieldTestRun::avg_pr_change_pct() const {
  return mean_of(rows, [](const auto& r) { return r.pr_change_pct(); });
}
double FieldTestRun::avg_ef_change_pct() const {
  return mean_of(rows, [](const auto& r) { return r.ef_change_pct(); });
}
double FieldTestRun::avg_cost_reduction_pct() const {
  return mean_of(rows, [](const auto& r) { return r.cost_reduction_pct(); });
}

double FieldTestReport::median_pr_change_pct() const {
  return median_of(runs, [](const auto& r) { return r.avg_pr_change_pct(); });
}
double FieldTestReport::median_ef_change_pct() const {
  return median_of(runs, [](const auto& r) { return r.avg_ef_change_pct(); });
}
double FieldTestReport::median_cost_reduction_pct() const {
  return median_of(runs, [](const auto& r) { return r.avg_cost_reduction_pct(); });
}

namespace {

double test_mape(const ModelBundle& b, const std::vector<TunnelingRecord>& records,
                 std::size_t n_train) {
  std::vector<TunnelingRecord> test(records.begin() + static_cast<std::ptrdiff_t>(n_train),
                                    records.end());
  return evaluate_bundle(b, test).mape;
}

}  // namespace

FieldTestReport replicate_field_test(const GroundTruth& gt, const std::vector<std::uint64_t>& seeds,
                                     const ReplicationOptions& opts) {
  if (seeds.empty()) throw InvalidInput("seeds", "need at least one seed");
  FieldTestReport report;
  for (std::uint64_t seed : seeds) {
    FieldTestRun run;
    run.seed = seed;

    Predictor pr_model = gt.pr_fn;
    Predictor ef_model = gt.ef_fn;
    ModelBundle pr_bundle;
    ModelBundle ef_bundle;
    if (!opts.truth_surrogates) {
      const auto pr_spec = ScenarioSpec::prcr(seed);
      const auto ef_spec = ScenarioSpec::ccr(mix(seed));
      const auto pr_data = generate_dataset(pr_spec, gt);
      const auto ef_data = generate_dataset(ef_spec, gt);
      const std::span<const TunnelingRecord> pr_train(pr_data.data(), pr_spec.n_train);
      const std::span<const TunnelingRecord> ef_train(ef_data.data(), ef_spec.n_train);

      TrainConfig pr_cfg = TrainConfig::prcr();
      pr_cfg.seed = seed;
      TrainConfig ef_cfg = TrainConfig::ccr();
      ef_cfg.seed = seed;
      pr_bundle = cross_validate(pr_train, Target::pr, 3, pr_cfg, Architecture::prcr()).bundle;
      ef_bundle = cross_validate(ef_train, Target::ef, 4, ef_cfg, Architecture::ccr()).bundle;
      run.pr_test_mape = test_mape(pr_bundle, pr_data, pr_spec.n_train);
      run.ef_test_mape = test_mape(ef_bundle, ef_data, ef_spec.n_train);
      pr_model = bundle_predictor(pr_bundle);
      ef_model = bundle_predictor(ef_bundle);
    }

    for (int mgt : {2, 3, 4}) {
      const RockMassState rock = field_test_rock(mgt);
      const Recommendation rec = optimize(rock, pr_model, ef_model, opts.cost, opts.grid);
      FieldComparison row;
      row.mgt = mgt;
      row.baseline = operator_baseline(mgt);
      row.recommended = {rec.th, rec.tor};
      row.pr_before = gt.pr_fn(rock, row.baseline);
      row.ef_before = gt.ef_fn(rock, row.baseline);
      row.pr_after = gt.pr_fn(rock, row.recommended);
      row.ef_after = gt.ef_fn(rock, row.recommended);
      row.cost_before = cost(row.pr_before, row.ef_before, opts.cost).total;
      row.cost_after = cost(row.pr_after, row.ef_after, opts.cost).total;
      run.rows.push_back(row);
    }
    report.runs.push_back(std::move(run));
  }
  return report;
}

namespace {

const char* muck_label(int mgt) {
  switch (mgt) {
    case 1: return "Rock debris";
    case 2: return "Rock debris and rock slices";
    case 3: return "Rock debris and rock block";
    case 4: return "Rock debris, rock slices and rock block";
    default: return "?";
  }
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

std::string format_report(const FieldTestReport& report) {
  std::ostringstream os;
  for (const auto& run : report.runs) {
    os << "seed " << run.seed;
    if (run.pr_test_mape) os << "  PR test MAPE " << fmt("%.2f", *run.pr_test_mape) << "%";
    if (run.ef_test_mape) os << "  Ef test MAPE " << fmt("%.2f", *run.ef_test_mape) << "%";
    os << "\n";
    os << "  Muck geometry type                        Param          Before       After   Rate (%)\n";
    for (const auto& r : run.rows) {
      char line[256];
      std::snprintf(line, sizeof line, "  %-41s %-10s %11.2f %11.2f %10.2f\n", muck_label(r.mgt),
                    "Th (kN)", r.baseline.th, r.recommended.th,
                    100.0 * (r.recommended.th - r.baseline.th) / r.baseline.th);
      os << line;
      std::snprintf(line, sizeof line, "  %-41s %-10s %11.2f %11.2f %10.2f\n", "", "Tor (kN*m)",
                    r.baseline.tor, r.recommended.tor,
                    100.0 * (r.recommended.tor - r.baseline.tor) / r.baseline.tor);
      os << line;
      std::snprintf(line, sizeof line, "  %-41s %-10s %11.2f %11.2f %10.2f\n", "", "PR", r.pr_before,
                    r.pr_after, r.pr_change_pct());
      os << line;
      std::snprintf(line, sizeof line, "  %-41s %-10s %11.2f %11.2f %10.2f\n", "", "Ef", r.ef_before,
                    r.ef_after, r.ef_change_pct());
      os << line;
      std::snprintf(line, sizeof line, "  %-41s %-10s %11.2f %11.2f %10.2f\n", "", "Cost (RMB)",
                    r.cost_before, r.cost_after, r.cost_reduction_pct());
      os << line;
    }
    os << "  average rate of change: PR " << fmt("%+.2f", run.avg_pr_change_pct()) << "%  Ef "
       << fmt("%+.2f", run.avg_ef_change_pct()) << "%  cost reduction "
       << fmt("%.2f", run.avg_cost_reduction_pct()) << "%\n\n";
  }
  if (!report.runs.empty()) {
    os << "median over " << report.runs.size() << " seed(s): PR "
       << fmt("%+.2f", report.median_pr_change_pct()) << "%  Ef "
       << fmt("%+.2f", report.median_ef_change_pct()) << "%  cost reduction "
       << fmt("%.2f", report.median_cost_reduction_pct()) << "%\n";
  }
  return os.str();
}

std::string format_report_csv(const FieldTestReport& report) {
  std::ostringstream os;
  os << "seed,mgt,th_before,tor_before,th_after,tor_after,pr_before,pr_after,pr_change_pct,"
        "ef_before,ef_after,ef_change_pct,cost_before,cost_after,cost_reduction_pct\n";
  for (const auto& run : report.runs) {
    for (const auto& r : run.rows) {
      os << run.seed << ',' << r.mgt << ',' << fmt("%.2f", r.baseline.th) << ','
         << fmt("%.2f", r.baseline.tor) << ',' << fmt("%.2f", r.recommended.th) << ','
         << fmt("%.2f", r.recommended.tor) << ',' << fmt("%.4f", r.pr_before) << ','
         << fmt("%.4f", r.pr_after) << ',' << fmt("%.4f", r.pr_change_pct()) << ','
         << fmt("%.4f", r.ef_before) << ',' << fmt("%.4f", r.ef_after) << ','
         << fmt("%.4f", r.ef_change_pct()) << ',' << fmt("%.4f", r.cost_before) << ','
         << fmt("%.4f", r.cost_after) << ',' << fmt("%.4f", r.cost_reduction_pct()) << '\n';
    }
  }
  return os.str();
}

}  // namespace tbm
