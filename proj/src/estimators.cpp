#include "otcic/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "otcic/kahan.hpp"
#include "otcic/ot.hpp"

namespace otcic {

namespace {

std::vector<double> cloud_means(const PointCloud& cloud) {
  std::vector<double> means(cloud.dim());
  for (std::size_t k = 0; k < cloud.dim(); ++k) {
    const std::vector<double> column = cloud.coordinate(k);
    means[k] = kahan_mean(column.data(), column.size());
  }
  return means;
}

// Smallest order statistic whose right-continuous empirical CDF reaches q.
// The 1e-12 slack keeps q values that sit exactly on a step (q = k/n) from
// spilling over to the next order statistic through rounding.
double quantile_of_sorted(const std::vector<double>& sorted, double q) {
  const double raw = std::ceil(q * static_cast<double>(sorted.size()) - 1e-12);
  std::size_t k = raw < 1.0 ? 1 : static_cast<std::size_t>(raw);
  if (k > sorted.size()) k = sorted.size();
  return sorted[k - 1];
}

QteCurve marginal_qte(const PointCloud& star, const PointCloud& dagger) {
  QteCurve curve;
  curve.grid = qte_grid();
  curve.effects.assign(curve.grid.size(), std::vector<double>(star.dim()));
  for (std::size_t k = 0; k < star.dim(); ++k) {
    std::vector<double> s = star.coordinate(k);
    std::vector<double> d = dagger.coordinate(k);
    std::sort(s.begin(), s.end());
    std::sort(d.begin(), d.end());
    for (std::size_t i = 0; i < curve.grid.size(); ++i)
      curve.effects[i][k] =
          quantile_of_sorted(s, curve.grid[i]) - quantile_of_sorted(d, curve.grid[i]);
  }
  return curve;
}

void require_uniform(const PointCloud& cloud, const char* name) {
  const double w = 1.0 / static_cast<double>(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (std::abs(cloud.weight(i) - w) > 1e-12)
      throw std::invalid_argument(std::string(name) + " must be uniformly weighted");
}

std::vector<UnitCounterfactual> build_per_unit(
    const PointCloud& treated_pre, const PointCloud& counterfactuals,
    const std::vector<std::uint32_t>* matched) {
  std::vector<UnitCounterfactual> per_unit;
  per_unit.reserve(treated_pre.size());
  for (std::size_t i = 0; i < treated_pre.size(); ++i) {
    UnitCounterfactual u;
    const auto pre = treated_pre.point(i);
    const auto cf = counterfactuals.point(i);
    u.pre_outcome.assign(pre.begin(), pre.end());
    if (matched) u.matched_control = (*matched)[i];
    u.counterfactual.assign(cf.begin(), cf.end());
    per_unit.push_back(std::move(u));
  }
  return per_unit;
}

// Per-unit effects exist only when treated units are pair-linked across both
// periods; then their mean reproduces the ate.
void attach_unit_effects(EffectReport& report, const PanelDataset& data,
                         const PointCloud& counterfactuals) {
  if (!data.treated_fully_paired()) return;
  const auto& pre_cell = data.cell_indices(Group::treated, Period::pre);
  std::unordered_map<std::size_t, std::size_t> row_of_record;
  row_of_record.reserve(pre_cell.size());
  for (std::size_t i = 0; i < pre_cell.size(); ++i) row_of_record[pre_cell[i]] = i;

  for (const auto& [pre, post] : data.treated_pairs()) {
    const std::size_t row = row_of_record.at(pre);
    const std::vector<double>& observed = data.records()[post].outcome;
    std::vector<double> effect(data.dim());
    for (std::size_t k = 0; k < data.dim(); ++k)
      effect[k] = observed[k] - counterfactuals.coord(row, k);
    report.unit_ids.push_back(data.records()[pre].unit_id);
    report.unit_effects.push_back(std::move(effect));
  }
}

EffectDiagnostics cell_diagnostics(const PanelDataset& data) {
  EffectDiagnostics diag;
  diag.n_control_pre = data.cell_size(Group::control, Period::pre);
  diag.n_control_post = data.cell_size(Group::control, Period::post);
  diag.n_treated_pre = data.cell_size(Group::treated, Period::pre);
  diag.n_treated_post = data.cell_size(Group::treated, Period::post);
  return diag;
}

}  // namespace

const char* to_string(Estimator e) {
  switch (e) {
    case Estimator::did: return "did";
    case Estimator::cic: return "cic";
    default: return "ot_cic";
  }
}

std::vector<double> qte_grid() {
  std::vector<double> grid(19);
  for (int k = 1; k <= 19; ++k) grid[k - 1] = static_cast<double>(k) / 20.0;
  return grid;
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  return quantile_of_sorted(values, q);
}

double qte(const PointCloud& star, const PointCloud& dagger, double q) {
  if (star.dim() != 1 || dagger.dim() != 1)
    throw std::invalid_argument("quantile treatment effects need 1-D samples");
  if (!(q > 0.0 && q < 1.0))
    throw std::invalid_argument("quantile level must lie in (0, 1)");
  return empirical_quantile(star.coordinate(0), q) -
         empirical_quantile(dagger.coordinate(0), q);
}

EffectReport did_estimate(const PanelDataset& data) {
  const std::vector<double> c0 = cloud_means(data.cell(Group::control, Period::pre));
  const std::vector<double> c1 = cloud_means(data.cell(Group::control, Period::post));
  const std::vector<double> t0 = cloud_means(data.cell(Group::treated, Period::pre));
  const std::vector<double> t1 = cloud_means(data.cell(Group::treated, Period::post));

  EffectReport report;
  report.estimator = Estimator::did;
  report.ate.resize(data.dim());
  for (std::size_t k = 0; k < data.dim(); ++k)
    report.ate[k] = (t1[k] - t0[k]) - (c1[k] - c0[k]);
  report.diagnostics = cell_diagnostics(data);
  return report;
}

PointCloud cic_counterfactuals(const PointCloud& control_pre,
                               const PointCloud& control_post,
                               const PointCloud& treated_pre) {
  if (control_pre.dim() != control_post.dim() || control_pre.dim() != treated_pre.dim())
    throw std::invalid_argument("point clouds have different dimensions");
  require_uniform(control_pre, "control pre cell");
  require_uniform(control_post, "control post cell");

  const std::size_t d = treated_pre.dim();
  const std::size_t n0 = control_pre.size();
  const std::size_t n1 = control_post.size();
  std::vector<double> flat(treated_pre.size() * d);
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<double> pre = control_pre.coordinate(k);
    std::vector<double> post = control_post.coordinate(k);
    std::sort(pre.begin(), pre.end());
    std::sort(post.begin(), post.end());
    for (std::size_t i = 0; i < treated_pre.size(); ++i) {
      const double y = treated_pre.coord(i, k);
      // Right-continuous CDF value c/n0, composed with the generalized
      // inverse of the post CDF. Integer arithmetic keeps the order
      // statistic index exact: r = ceil(c * n1 / n0).
      const std::size_t c = static_cast<std::size_t>(
          std::upper_bound(pre.begin(), pre.end(), y) - pre.begin());
      const std::size_t r = c == 0 ? 1 : (c * n1 + n0 - 1) / n0;
      flat[i * d + k] = post[r - 1];
    }
  }
  return PointCloud(std::move(flat), d);
}

OtCounterfactuals ot_counterfactuals(const PointCloud& control_pre,
                                     const PointCloud& control_post,
                                     const PointCloud& treated_pre,
                                     Rounding rounding, std::uint64_t max_pivots) {
  const TransportPlan plan = solve_ot(control_pre, control_post, max_pivots);
  TransportMap drift = round_to_map(plan, rounding);
  std::vector<std::uint32_t> matched = nearest_neighbors(treated_pre, control_pre);

  const std::size_t d = control_post.dim();
  std::vector<double> flat;
  flat.reserve(treated_pre.size() * d);
  for (std::size_t i = 0; i < treated_pre.size(); ++i) {
    const auto image = drift.image(matched[i]);
    flat.insert(flat.end(), image.begin(), image.end());
  }
  return OtCounterfactuals{PointCloud(std::move(flat), d), std::move(drift),
                           std::move(matched), plan.cost()};
}

std::pair<CounterfactualResult, EffectReport> cic_estimate(const PanelDataset& data) {
  const PointCloud c0 = data.cell(Group::control, Period::pre);
  const PointCloud c1 = data.cell(Group::control, Period::post);
  const PointCloud t0 = data.cell(Group::treated, Period::pre);
  const PointCloud t1 = data.cell(Group::treated, Period::post);

  PointCloud cf = cic_counterfactuals(c0, c1, t0);

  EffectReport report;
  report.estimator = Estimator::cic;
  const std::vector<double> post_means = cloud_means(t1);
  const std::vector<double> cf_means = cloud_means(cf);
  report.ate.resize(data.dim());
  for (std::size_t k = 0; k < data.dim(); ++k)
    report.ate[k] = post_means[k] - cf_means[k];
  report.qte = marginal_qte(t1, cf);
  attach_unit_effects(report, data, cf);
  report.diagnostics = cell_diagnostics(data);

  std::optional<TransportMap> drift;
  if (data.dim() == 1) {
    // In one dimension the quantile composition is itself a transport map;
    // expose it. Tensorizing coordinates above 1-D yields no joint map.
    const TransportPlan plan = solve_ot_1d(c0, c1);
    report.diagnostics.plan_cost = plan.cost();
    drift = round_to_map(plan, Rounding::mode);
  }

  std::vector<UnitCounterfactual> per_unit = build_per_unit(t0, cf, nullptr);
  CounterfactualResult result{std::move(cf), std::move(per_unit), std::move(drift),
                              std::nullopt};
  return {std::move(result), std::move(report)};
}

std::pair<CounterfactualResult, EffectReport> ot_cic_estimate(const PanelDataset& data,
                                                              Rounding rounding) {
  const PointCloud c0 = data.cell(Group::control, Period::pre);
  const PointCloud c1 = data.cell(Group::control, Period::post);
  const PointCloud t0 = data.cell(Group::treated, Period::pre);
  const PointCloud t1 = data.cell(Group::treated, Period::post);

  OtCounterfactuals oc = ot_counterfactuals(c0, c1, t0, rounding);

  EffectReport report;
  report.estimator = Estimator::ot_cic;
  const std::vector<double> post_means = cloud_means(t1);
  const std::vector<double> cf_means = cloud_means(oc.counterfactuals);
  report.ate.resize(data.dim());
  for (std::size_t k = 0; k < data.dim(); ++k)
    report.ate[k] = post_means[k] - cf_means[k];
  report.qte = marginal_qte(t1, oc.counterfactuals);
  attach_unit_effects(report, data, oc.counterfactuals);
  report.diagnostics = cell_diagnostics(data);
  report.diagnostics.plan_cost = oc.plan_cost;
  report.diagnostics.rounding = rounding;

  std::vector<UnitCounterfactual> per_unit = build_per_unit(t0, oc.counterfactuals, &oc.matched);
  CounterfactualResult result{std::move(oc.counterfactuals), std::move(per_unit),
                              std::move(oc.drift), std::nullopt};
  return {std::move(result), std::move(report)};
}

TransportMap couple_counterfactuals(const PointCloud& treated_post,
                                    const PointCloud& counterfactuals) {
  return round_to_map(solve_ot(treated_post, counterfactuals), Rounding::mode);
}

}  // namespace otcic
