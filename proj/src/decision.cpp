#include "tbm/decision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tbm/error.hpp"
#include "tbm/model.hpp"

namespace tbm {

namespace {

void positive(double v, const char* field) {
  if (!(v > 0) || !std::isfinite(v)) throw InvalidInput(field, std::string(field) + " must be > 0");
}

std::size_t axis_count(double min, double max, double step) {
  return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
}

}  // namespace

void validate(const CostParams& p) {
  positive(p.c1, "c1");
  positive(p.c2, "c2");
  positive(p.d_tbm, "d_tbm");
  positive(p.w_max, "w_max");
  positive(p.t_daily, "t_daily");
  positive(p.l, "l");
}

void validate(const GridSpec& g) {
  positive(g.th_min, "th_min");
  positive(g.tor_min, "tor_min");
  positive(g.th_step, "th_step");
  positive(g.tor_step, "tor_step");
  if (!std::isfinite(g.th_max) || g.th_max < g.th_min)
    throw InvalidInput("th_max", "th_max must be >= th_min");
  if (!std::isfinite(g.tor_max) || g.tor_max < g.tor_min)
    throw InvalidInput("tor_max", "tor_max must be >= tor_min");
  // Guards against accidental multi-million-point grids.
  if (axis_count(g.th_min, g.th_max, g.th_step) * axis_count(g.tor_min, g.tor_max, g.tor_step) >
      4'000'000)
    throw InvalidInput("th_step", "grid exceeds 4,000,000 points");
}

std::vector<double> axis_values(double min, double max, double step) {
  const std::size_t n = axis_count(min, max, step);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = min + static_cast<double>(i) * step;
  return v;
}

CostBreakdown cost(double pr, double ef, const CostParams& p) {
  if (!(pr > 0) || !std::isfinite(pr)) throw InfeasiblePoint("penetration rate must be > 0");
  if (!(ef > 0) || !std::isfinite(ef)) throw InfeasiblePoint("cutter life must be > 0");
  CostBreakdown c;
  c.cutter = p.c1 * std::numbers::pi * p.d_tbm * p.d_tbm * p.l / (4.0 * ef * p.w_max);
  c.period = p.c2 * p.l / (pr * 0.06 * p.t_daily);
  c.total = c.cutter + c.period;
  return c;
}

std::vector<MachineSetting> grid_points(const GridSpec& g) {
  validate(g);
  const auto th = axis_values(g.th_min, g.th_max, g.th_step);
  const auto tor = axis_values(g.tor_min, g.tor_max, g.tor_step);
  std::vector<MachineSetting> pts;
  pts.reserve(th.size() * tor.size());
  for (double a : th)
    for (double b : tor) pts.push_back({a, b});
  return pts;
}

Predictor bundle_predictor(const ModelBundle& bundle) {
  return [&bundle](const RockMassState& r, const MachineSetting& m) { return bundle.predict(r, m); };
}

PointEvaluation evaluate_point(const RockMassState& rock, const MachineSetting& machine,
                               const Predictor& pr_model, const Predictor& ef_model,
                               const CostParams& p) {
  PointEvaluation e;
  e.machine = machine;
  e.pr = pr_model(rock, machine);
  e.ef = ef_model(rock, machine);
  e.feasible = e.pr > 0 && e.ef > 0 && std::isfinite(e.pr) && std::isfinite(e.ef);
  if (e.feasible) e.cost = cost(e.pr, e.ef, p);
  return e;
}

CostSurface cost_surface(const RockMassState& rock, const Predictor& pr_model,
                         const Predictor& ef_model, const CostParams& p, const GridSpec& g) {
  validate(rock);
  validate(p);
  validate(g);
  CostSurface s;
  s.th_values = axis_values(g.th_min, g.th_max, g.th_step);
  s.tor_values = axis_values(g.tor_min, g.tor_max, g.tor_step);
  const std::size_t nth = s.th_values.size();
  const std::size_t ntor = s.tor_values.size();
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  s.cost.assign(nth, std::vector<double>(ntor, nan));
  s.pr.assign(nth, std::vector<double>(ntor, nan));
  s.ef.assign(nth, std::vector<double>(ntor, nan));

  bool found = false;
  double best = 0.0;
  for (std::size_t i = 0; i < nth; ++i) {
    for (std::size_t j = 0; j < ntor; ++j) {
      const auto e = evaluate_point(rock, {s.th_values[i], s.tor_values[j]}, pr_model, ef_model, p);
      s.pr[i][j] = e.pr;
      s.ef[i][j] = e.ef;
      if (!e.feasible) continue;
      s.cost[i][j] = e.cost.total;
      // Strict comparison in row-major order keeps the lowest (th, tor) on ties.
      if (!found || e.cost.total < best) {
        found = true;
        best = e.cost.total;
        s.optimum_th = i;
        s.optimum_tor = j;
      }
    }
  }
  if (!found) throw NoFeasiblePoint();
  return s;
}

Recommendation recommendation_from_surface(const CostSurface& s, const CostParams& p) {
  Recommendation r;
  const std::size_t i = s.optimum_th;
  const std::size_t j = s.optimum_tor;
  r.th = s.th_values.at(i);
  r.tor = s.tor_values.at(j);
  r.pr = s.pr[i][j];
  r.ef = s.ef[i][j];
  const auto c = cost(r.pr, r.ef, p);
  r.cost = c.total;
  r.cutter_cost = c.cutter;
  r.period_cost = c.period;
  std::size_t feasible = 0;
  std::size_t total = 0;
  for (const auto& row : s.cost) {
    for (double v : row) {
      ++total;
      if (std::isfinite(v)) ++feasible;
    }
  }
  r.feasible_fraction = static_cast<double>(feasible) / static_cast<double>(total);
  return r;
}

Recommendation optimize(const RockMassState& rock, const Predictor& pr_model,
                        const Predictor& ef_model, const CostParams& p, const GridSpec& g) {
  return recommendation_from_surface(cost_surface(rock, pr_model, ef_model, p, g), p);
}

Recommendation optimize(const RockMassState& rock, const ModelBundle& pr_model,
                        const ModelBundle& ef_model, const CostParams& p, const GridSpec& g) {
  if (pr_model.preprocessor.output_dim != pr_model.network.input_dim ||
      ef_model.preprocessor.output_dim != ef_model.network.input_dim)
    throw InvalidInput("model", "model preprocessor and network dimensions disagree");
  return optimize(rock, bundle_predictor(pr_model), bundle_predictor(ef_model), p, g);
}

CostSurface cost_surface(const RockMassState& rock, const ModelBundle& pr_model,
                         const ModelBundle& ef_model, const CostParams& p, const GridSpec& g) {
  return cost_surface(rock, bundle_predictor(pr_model), bundle_predictor(ef_model), p, g);
}

namespace {

bool on_axis(double v, double min, double max, double step) {
  if (v < min - 1e-9 || v > max + 1e-9) return false;
  const double k = (v - min) / step;
  return std::abs(k - std::round(k)) * step <= 1e-9;
}

double snap_axis(double v, double min, double max, double step) {
  const auto n = axis_count(min, max, step);
  double k = std::round((v - min) / step);
  k = std::clamp(k, 0.0, static_cast<double>(n - 1));
  return min + k * step;
}

}  // namespace

bool on_grid(const MachineSetting& m, const GridSpec& g) {
  return on_axis(m.th, g.th_min, g.th_max, g.th_step) &&
         on_axis(m.tor, g.tor_min, g.tor_max, g.tor_step);
}

MachineSetting snap_to_grid(const MachineSetting& m, const GridSpec& g) {
  validate(g);
  return {snap_axis(m.th, g.th_min, g.th_max, g.th_step),
          snap_axis(m.tor, g.tor_min, g.tor_max, g.tor_step)};
}

}  // namespace tbm
