#pragma once

// Cost objective over (thrust, torque) and exhaustive grid search.
//
//   cutter term = c1 * pi * D^2 * L / (4 * Ef * Wmax)
//   period term = c2 * L / (PR * 0.06 * T)
//
// 0.06 * T converts a penetration rate in mm/min into metres advanced per
// day of T effective hours (PR * 60 * T / 1000).

#include <cstddef>
#include <functional>
#include <vector>

#include "tbm/domain.hpp"

namespace tbm {

struct ModelBundle;

struct CostParams {
  double c1 = 30000.0;   // RMB per cutter
  double c2 = 350000.0;  // RMB per day
  double d_tbm = 6.0;    // cutterhead diameter, m
  double w_max = 25.0;   // cutter wear limit, mm
  double t_daily = 10.0; // effective tunnelling hours per day
  double l = 1.0;        // reference length, m

  bool operator==(const CostParams&) const = default;
};

void validate(const CostParams& p);

struct GridSpec {
  double th_min = 2000.0;
  double th_max = 10000.0;
  double th_step = 100.0;
  double tor_min = 200.0;
  double tor_max = 1500.0;
  double tor_step = 50.0;

  bool operator==(const GridSpec&) const = default;
};

// min <= max (a single-value axis is allowed) and step > 0.
void validate(const GridSpec& g);

// Inclusive arithmetic sequence min, min+step, ... <= max.
std::vector<double> axis_values(double min, double max, double step);

struct CostBreakdown {
  double total = 0.0;
  double cutter = 0.0;
  double period = 0.0;
};

// Throws InfeasiblePoint for non-positive pr or ef.
CostBreakdown cost(double pr, double ef, const CostParams& p);

// Row-major: thrust outer, torque inner.
std::vector<MachineSetting> grid_points(const GridSpec& g);

using Predictor = std::function<double(const RockMassState&, const MachineSetting&)>;

Predictor bundle_predictor(const ModelBundle& bundle);

struct PointEvaluation {
  MachineSetting machine;
  double pr = 0.0;
  double ef = 0.0;
  bool feasible = false;
  CostBreakdown cost;  // meaningful only when feasible
};

PointEvaluation evaluate_point(const RockMassState& rock, const MachineSetting& machine,
                               const Predictor& pr_model, const Predictor& ef_model,
                               const CostParams& p);

struct Recommendation {
  double th = 0.0;
  double tor = 0.0;
  double pr = 0.0;
  double ef = 0.0;
  double cost = 0.0;
  double cutter_cost = 0.0;
  double period_cost = 0.0;
  double feasible_fraction = 0.0;

  bool operator==(const Recommendation&) const = default;
};

// Cost, PR and Ef per grid cell, indexed [th][tor]. Infeasible cells hold NaN
// cost.
struct CostSurface {
  std::vector<double> th_values;
  std::vector<double> tor_values;
  std::vector<std::vector<double>> cost;
  std::vector<std::vector<double>> pr;
  std::vector<std::vector<double>> ef;
  std::size_t optimum_th = 0;
  std::size_t optimum_tor = 0;
};

// Minimum-cost grid point. Points with pr <= 0 or ef <= 0 are excluded; ties
// go to the lower thrust, then the lower torque. Throws NoFeasiblePoint.
Recommendation optimize(const RockMassState& rock, const Predictor& pr_model,
                        const Predictor& ef_model, const CostParams& p, const GridSpec& g);

CostSurface cost_surface(const RockMassState& rock, const Predictor& pr_model,
                         const Predictor& ef_model, const CostParams& p, const GridSpec& g);

Recommendation recommendation_from_surface(const CostSurface& s, const CostParams& p);

Recommendation optimize(const RockMassState& rock, const ModelBundle& pr_model,
                        const ModelBundle& ef_model, const CostParams& p, const GridSpec& g);

CostSurface cost_surface(const RockMassState& rock, const ModelBundle& pr_model,
                         const ModelBundle& ef_model, const CostParams& p, const GridSpec& g);

// True when the setting coincides with a grid node (within 1e-9 of a step).
bool on_grid(const MachineSetting& m, const GridSpec& g);

// Nearest grid node, clamped to the grid bounds.
MachineSetting snap_to_grid(const MachineSetting& m, const GridSpec& g);

}  // namespace tbm
