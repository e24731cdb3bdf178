#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "otcic/panel.hpp"
#include "otcic/point_cloud.hpp"
#include "otcic/transport.hpp"

namespace otcic {

enum class Estimator { did, cic, ot_cic };
const char* to_string(Estimator e);

// One treated unit's counterfactual. matched_control indexes the control-pre
// cell when the counterfactual came from a nearest-neighbor match; the
// coordinatewise estimator leaves it empty.
struct UnitCounterfactual {
  std::vector<double> pre_outcome;
  std::optional<std::size_t> matched_control;
  std::vector<double> counterfactual;
};

// Estimated untreated post-period outcomes for the treated units, plus the
// maps used to build them. drift_map is the estimated control-group evolution
// (absent for the coordinatewise estimator above one dimension, which has no
// joint map). coupling_map pairs treated post outcomes with counterfactuals
// and is only filled on request, since it leans on the strongest assumption.
struct CounterfactualResult {
  PointCloud counterfactuals;
  std::vector<UnitCounterfactual> per_unit;
  std::optional<TransportMap> drift_map;
  std::optional<TransportMap> coupling_map;
};

struct EffectDiagnostics {
  std::size_t n_control_pre = 0;
  std::size_t n_control_post = 0;
  std::size_t n_treated_pre = 0;
  std::size_t n_treated_post = 0;
  std::optional<double> plan_cost;
  std::optional<Rounding> rounding;
};

// Per-coordinate quantile treatment effects on a grid in (0,1).
// effects[i][k] is the effect at grid[i] in coordinate k.
struct QteCurve {
  std::vector<double> grid;
  std::vector<std::vector<double>> effects;
};

struct EffectReport {
  Estimator estimator = Estimator::did;
  std::vector<double> ate;
  std::optional<QteCurve> qte;
  // Parallel arrays, filled only when every treated unit is pair-linked
  // across periods; then mean(unit_effects) equals ate up to rounding.
  std::vector<std::string> unit_ids;
  std::vector<std::vector<double>> unit_effects;
  EffectDiagnostics diagnostics;

  bool has_unit_effects() const { return !unit_effects.empty(); }
};

// The 19-point grid {0.05, 0.10, ..., 0.95}.
std::vector<double> qte_grid();

// Generalized inverse of the right-continuous empirical CDF over equally
// weighted values: the smallest order statistic whose CDF value reaches q.
// q = 0 gives the minimum, q = 1 the maximum.
double empirical_quantile(std::vector<double> values, double q);

// Quantile treatment effect between two 1-D samples at q in (0,1).
double qte(const PointCloud& star, const PointCloud& dagger, double q);

// Classical two-by-two difference of cell-mean differences. No quantile or
// unit-level output.
EffectReport did_estimate(const PanelDataset& data);

// Coordinatewise changes-in-changes: each treated pre outcome is pushed
// through the composition of the control-post quantile function with the
// control-pre CDF, one coordinate at a time.
std::pair<CounterfactualResult, EffectReport> cic_estimate(const PanelDataset& data);

// Transport-based changes-in-changes: estimate the control drift as an
// optimal transport map between the control cells, extend it to treated pre
// outcomes by nearest-neighbor matching in the control-pre support, and read
// effects off the counterfactual cloud.
std::pair<CounterfactualResult, EffectReport> ot_cic_estimate(
    const PanelDataset& data, Rounding rounding = Rounding::mode);

// Optimal pairing of observed treated post outcomes with counterfactuals,
// enabling distribution-of-effects summaries. Opt-in: valid only under a
// rank-preservation assumption stronger than the estimators need.
TransportMap couple_counterfactuals(const PointCloud& treated_post,
                                    const PointCloud& counterfactuals);

// Cloud-level building blocks shared with the simulation driver.

struct OtCounterfactuals {
  PointCloud counterfactuals;
  TransportMap drift;
  std::vector<std::uint32_t> matched;  // control-pre index per source point
  double plan_cost = 0.0;
};

// Drift map from solve_ot(control_pre, control_post), rounded, then applied
// to each source point's nearest control-pre neighbor (ties take the lowest
// index).
OtCounterfactuals ot_counterfactuals(const PointCloud& control_pre,
                                     const PointCloud& control_post,
                                     const PointCloud& treated_pre,
                                     Rounding rounding = Rounding::mode,
                                     std::uint64_t max_pivots = 0);

// Coordinatewise quantile re-mapping of treated_pre through the control
// cells. Requires uniformly weighted clouds.
PointCloud cic_counterfactuals(const PointCloud& control_pre,
                               const PointCloud& control_post,
                               const PointCloud& treated_pre);

}  // namespace otcic
