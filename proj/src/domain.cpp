#include "tbm/domain.hpp"

#include <cmath>
#include <numbers>

#include "tbm/error.hpp"

namespace tbm {

const char* to_string(Target t) noexcept { return t == Target::pr ? "pr" : "ef"; }

Target parse_target(const std::string& s) {
  if (s == "pr") return Target::pr;
  if (s == "ef") return Target::ef;
  throw InvalidInput("target", "target must be \"pr\" or \"ef\", got \"" + s + "\"");
}

namespace {

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw InvalidInput(field, std::string(field) + " " + what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void validate(const RockMassState& r, int n_sieves) {
  require(r.src >= 2 && r.src <= 5, "src", "must be in {2,3,4,5} (classes II-V)");
  require(finite(r.ucs) && r.ucs > 0, "ucs", "must be > 0");
  require(finite(r.rqd) && r.rqd >= 0 && r.rqd <= 100, "rqd", "must be within [0, 100]");
  require(finite(r.cai) && r.cai > 0, "cai", "must be > 0");
  require(finite(r.q) && r.q >= 0 && r.q <= 100, "q", "must be within [0, 100]");
  require(finite(r.ci) && r.ci >= 0 && r.ci <= 100.0 * n_sieves, "ci",
          "must be within [0, " + std::to_string(100 * n_sieves) + "]");
  require(finite(r.m) && r.m > 0, "m", "must be > 0");
  require(r.mgt >= 1 && r.mgt <= 4, "mgt", "must be in {1,2,3,4}");
}

void validate(const MachineSetting& m) {
  require(finite(m.th) && m.th > 0, "th", "must be > 0");
  require(finite(m.tor) && m.tor > 0, "tor", "must be > 0");
}

void validate(const TunnelingRecord& rec) {
  validate(rec.rock);
  validate(rec.machine);
  if (!rec.pr && !rec.ef) throw InvalidInput("pr", "record needs at least one of pr, ef");
  if (rec.pr) require(finite(*rec.pr) && *rec.pr > 0, "pr", "must be > 0");
  if (rec.ef) require(finite(*rec.ef) && *rec.ef > 0, "ef", "must be > 0");
  if (rec.chainage) require(finite(*rec.chainage), "chainage", "must be finite");
}

double SieveAnalysis::total_mass() const {
  double total = pan_g;
  for (const auto& b : bins) total += b.retained_g;
  return total;
}

void validate(const SieveAnalysis& s) {
  if (s.bins.empty()) throw InvalidInput("bins", "sieve analysis needs at least one sieve");
  for (std::size_t i = 0; i < s.bins.size(); ++i) {
    const auto& b = s.bins[i];
    require(finite(b.opening_mm) && b.opening_mm > 0, "sieve_mm", "must be > 0");
    require(finite(b.retained_g) && b.retained_g >= 0, "retained_g", "must be >= 0");
    if (i > 0 && !(b.opening_mm < s.bins[i - 1].opening_mm))
      throw InvalidInput("sieve_mm", "sieve openings must be strictly decreasing");
  }
  require(finite(s.pan_g) && s.pan_g >= 0, "pan_g", "must be >= 0");
  if (!(s.total_mass() > 0)) throw InvalidInput("retained_g", "total sieve mass must be > 0");
}

double cutter_life_from_wear(const WearInterval& w) {
  const double length = w.end_m - w.start_m;
  require(finite(length) && length > 0, "end", "must exceed start");
  require(finite(w.total_wear_mm) && w.total_wear_mm > 0, "total_wear", "must be > 0");
  require(finite(w.cutterhead_diameter_m) && w.cutterhead_diameter_m > 0,
          "cutterhead_diameter", "must be > 0");
  const double d = w.cutterhead_diameter_m;
  return std::numbers::pi * d * d * length / (4.0 * w.total_wear_mm);
}

double coarseness_index(const SieveAnalysis& s) {
  validate(s);
  const double total = s.total_mass();
  double cumulative = 0.0;
  double ci = 0.0;
  for (const auto& b : s.bins) {
    cumulative += b.retained_g;
    ci += 100.0 * cumulative / total;
  }
  return ci;
}

double passing_size(const SieveAnalysis& s, double percent, bool* clamped) {
  validate(s);
  if (clamped) *clamped = false;
  const double total = s.total_mass();
  const std::size_t n = s.bins.size();

  std::size_t nonzero = 0;
  std::size_t only = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (s.bins[i].retained_g > 0) {
      ++nonzero;
      only = i;
    }
  }
  if (nonzero == 1 && s.pan_g == 0) return s.bins[only].opening_mm;

  // passing[i]: percent of mass finer than bins[i].opening_mm.
  std::vector<double> passing(n);
  double retained = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    retained += s.bins[i].retained_g;
    passing[i] = 100.0 * (total - retained) / total;
  }

  if (percent < passing[n - 1]) {
    if (clamped) *clamped = true;
    return s.bins[n - 1].opening_mm;
  }
  if (percent == passing[n - 1]) return s.bins[n - 1].opening_mm;
  for (std::size_t i = n - 1; i > 0; --i) {
    const double lo = passing[i];
    const double hi = passing[i - 1];
    if (lo < percent && percent <= hi) {
      const double frac = (percent - lo) / (hi - lo);
      const double a = std::log10(s.bins[i].opening_mm);
      const double b = std::log10(s.bins[i - 1].opening_mm);
      return std::pow(10.0, a + frac * (b - a));
    }
  }
  // Mass retained on the top sieve has no upper bound to interpolate towards.
  if (clamped) *clamped = true;
  return s.bins.front().opening_mm;
}

GrainSize mean_grain_size(const SieveAnalysis& s) {
  GrainSize g;
  bool c16 = false, c50 = false, c84 = false;
  g.d16_mm = passing_size(s, 16.0, &c16);
  g.d50_mm = passing_size(s, 50.0, &c50);
  g.d84_mm = passing_size(s, 84.0, &c84);
  g.clamped = c16 || c50 || c84;
  g.mean_mm = (g.d16_mm + g.d50_mm + g.d84_mm) / 3.0;
  return g;
}

int classify_muck_geometry(bool debris, bool slices, bool blocks) {
  if (!debris && !slices && !blocks)
    throw InvalidInput("mgt", "at least one muck component must be present");
  if (!debris)
    throw UnsupportedCombination("muck geometry without rock debris is not a defined class");
  if (slices && blocks) return 4;
  if (blocks) return 3;
  if (slices) return 2;
  return 1;
}

int classify_muck_geometry(const MuckFlags& f) {
  return classify_muck_geometry(f.debris, f.slices, f.blocks);
}

MuckFlags muck_flags(int mgt) {
  switch (mgt) {
    case 1: return {true, false, false};
    case 2: return {true, true, false};
    case 3: return {true, false, true};
    case 4: return {true, true, true};
    default: throw InvalidInput("mgt", "mgt must be in {1,2,3,4}");
  }
}

}  // namespace tbm
