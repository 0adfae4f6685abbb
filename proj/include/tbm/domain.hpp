#pragma once

// Core domain types and closed-form muck / cutter metrics.
//
// Units are fixed across the project:
//   thrust kN, torque kN*m, penetration rate mm/min, cutter life m^3/mm,
//   UCS MPa, particle and sieve sizes mm, lengths m.

#include <optional>
#include <string>
#include <vector>

namespace tbm {

inline constexpr int kDefaultSieveCount = 6;

enum class Target { pr, ef };

const char* to_string(Target t) noexcept;
Target parse_target(const std::string& s);

// Rock-side model inputs for one tunnel location.
struct RockMassState {
  int src = 3;        // surrounding-rock class, II..V encoded 2..5
  double ucs = 0.0;   // MPa
  double rqd = 0.0;   // %
  double cai = 0.0;   // Cerchar abrasivity index
  double q = 0.0;     // quartz content, %
  double ci = 0.0;    // coarseness index
  double m = 0.0;     // mean grain size, mm
  int mgt = 1;        // muck geometry type 1..4

  bool operator==(const RockMassState&) const = default;
};

// Throws InvalidInput naming the first violated field.
void validate(const RockMassState& rock, int n_sieves = kDefaultSieveCount);

struct MachineSetting {
  double th = 0.0;   // kN
  double tor = 0.0;  // kN*m

  bool operator==(const MachineSetting&) const = default;
};

void validate(const MachineSetting& machine);

struct TunnelingRecord {
  std::optional<double> chainage;  // m, only used for ordering
  RockMassState rock;
  MachineSetting machine;
  std::optional<double> pr;  // mm/min
  std::optional<double> ef;  // m^3/mm

  bool operator==(const TunnelingRecord&) const = default;

  std::optional<double> target(Target t) const { return t == Target::pr ? pr : ef; }
};

void validate(const TunnelingRecord& record);

struct SieveBin {
  double opening_mm = 0.0;
  double retained_g = 0.0;

  bool operator==(const SieveBin&) const = default;
};

// Sieve stack ordered coarsest first; the pan catches everything below the
// finest opening.
struct SieveAnalysis {
  std::string sample_id;
  std::vector<SieveBin> bins;
  double pan_g = 0.0;

  double total_mass() const;
  bool operator==(const SieveAnalysis&) const = default;
};

void validate(const SieveAnalysis& s);

struct WearInterval {
  double start_m = 0.0;
  double end_m = 0.0;
  double total_wear_mm = 0.0;  // summed over every cutter on the head
  double cutterhead_diameter_m = 0.0;
};

// Excavated volume per millimetre of accumulated cutter wear, m^3/mm.
double cutter_life_from_wear(const WearInterval& interval);

// Sum of cumulative retained percentages, coarsest sieve first. Ranges from 0
// (everything in the pan) to 100 * n_sieves (everything on the top sieve).
double coarseness_index(const SieveAnalysis& s);

struct GrainSize {
  double mean_mm = 0.0;
  double d16_mm = 0.0;
  double d50_mm = 0.0;
  double d84_mm = 0.0;
  // Set when a percentile fell outside the sieve stack and was pinned to the
  // finest (or coarsest) opening.
  bool clamped = false;
};

// Mean of the 16/50/84 % passing sizes. Sizes between sieves are found by
// linear interpolation of cumulative passing percent against log10(size).
GrainSize mean_grain_size(const SieveAnalysis& s);

// Size at which `percent` of the mass is finer. `clamped` is set when the
// percentile lies outside the stack.
double passing_size(const SieveAnalysis& s, double percent, bool* clamped = nullptr);

struct MuckFlags {
  bool debris = false;
  bool slices = false;
  bool blocks = false;

  bool operator==(const MuckFlags&) const = default;
};

// 1 debris, 2 debris+slices, 3 debris+blocks, 4 debris+slices+blocks.
int classify_muck_geometry(bool debris, bool slices, bool blocks);
int classify_muck_geometry(const MuckFlags& flags);
MuckFlags muck_flags(int mgt);

}  // namespace tbm
