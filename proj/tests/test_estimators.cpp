#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"

#include "otcic/estimators.hpp"
#include "otcic/panel.hpp"
#include "otcic/point_cloud.hpp"
#include "otcic/rng.hpp"

using otcic::EffectReport;
using otcic::Group;
using otcic::PanelDataset;
using otcic::PanelRecord;
using otcic::Period;
using otcic::PointCloud;
using otcic::Rng;
using otcic::Rounding;

namespace {

void append_cell(std::vector<PanelRecord>& records, const std::string& prefix, Group group,
                 Period period, const std::vector<std::vector<double>>& rows, bool paired = false) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    PanelRecord rec;
    rec.unit_id = prefix + std::to_string(i);
    rec.group = group;
    rec.period = period;
    rec.outcome = rows[i];
    if (paired) rec.pair_id = rec.unit_id;
    records.push_back(std::move(rec));
  }
}

PanelDataset make_panel(const std::vector<std::vector<double>>& c0,
                        const std::vector<std::vector<double>>& c1,
                        const std::vector<std::vector<double>>& t0,
                        const std::vector<std::vector<double>>& t1, bool paired = false) {
  std::vector<PanelRecord> records;
  append_cell(records, "c", Group::control, Period::pre, c0);
  append_cell(records, "k", Group::control, Period::post, c1);
  append_cell(records, "t", Group::treated, Period::pre, t0, paired);
  append_cell(records, "t", Group::treated, Period::post, t1, paired);
  return PanelDataset(std::move(records));
}

std::vector<std::vector<double>> gaussian_rows(Rng& rng, std::size_t n, std::size_t d,
                                               const std::vector<double>& shift) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  for (auto& row : rows) {
    for (std::size_t k = 0; k < d; ++k) row[k] = rng.gaussian() + shift[k];
  }
  return rows;
}

std::vector<double> column_mean(const std::vector<std::vector<double>>& effects) {
  std::vector<double> mean(effects.empty() ? 0 : effects[0].size(), 0.0);
  for (const auto& row : effects) {
    for (std::size_t k = 0; k < row.size(); ++k) mean[k] += row[k];
  }
  for (double& m : mean) m /= static_cast<double>(effects.size());
  return mean;
}

}  // namespace

TEST_CASE("the quantile grid covers 0.05 through 0.95") {
  const auto grid = otcic::qte_grid();
  REQUIRE(grid.size() == 19);
  CHECK(grid.front() == doctest::Approx(0.05));
  CHECK(grid[9] == doctest::Approx(0.5));
  CHECK(grid.back() == doctest::Approx(0.95));
}

TEST_CASE("empirical quantiles use the left-continuous generalized inverse") {
  const std::vector<double> values = {3.0, 1.0, 4.0, 2.0};
  CHECK(otcic::empirical_quantile(values, 0.0) == 1.0);
  CHECK(otcic::empirical_quantile(values, 0.25) == 1.0);
  CHECK(otcic::empirical_quantile(values, 0.26) == 2.0);
  CHECK(otcic::empirical_quantile(values, 0.5) == 2.0);
  CHECK(otcic::empirical_quantile(values, 0.75) == 3.0);
  CHECK(otcic::empirical_quantile(values, 1.0) == 4.0);
  CHECK_THROWS_AS(otcic::empirical_quantile({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(otcic::empirical_quantile(values, 1.5), std::invalid_argument);
}

TEST_CASE("median treatment effect of a two-spike distribution") {
  const PointCloud star({1.0, 2.0, 3.0, 4.0}, 1);
  const PointCloud dagger({0.0, 0.0, 10.0, 10.0}, 1);
  CHECK(otcic::qte(star, dagger, 0.5) == doctest::Approx(2.0));
  CHECK_THROWS_AS(otcic::qte(star, dagger, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(otcic::qte(star, dagger, 1.0), std::invalid_argument);
}

TEST_CASE("mean differencing is invariant to group and time effects") {
  Rng rng(201);
  const std::vector<double> zero = {0.0, 0.0};
  const auto c0 = gaussian_rows(rng, 40, 2, zero);
  const auto c1 = gaussian_rows(rng, 35, 2, zero);
  const auto t0 = gaussian_rows(rng, 30, 2, zero);
  const auto t1 = gaussian_rows(rng, 30, 2, zero);
  const EffectReport base = otcic::did_estimate(make_panel(c0, c1, t0, t1));

  const std::vector<double> group_effect = {1.7, -0.4};
  const std::vector<double> time_effect = {-2.3, 0.9};
  auto add = [](std::vector<std::vector<double>> rows, const std::vector<double>& delta) {
    for (auto& row : rows)
      for (std::size_t k = 0; k < row.size(); ++k) row[k] += delta[k];
    return rows;
  };
  auto t0_shifted = add(t0, group_effect);
  auto t1_shifted = add(add(t1, group_effect), time_effect);
  auto c1_shifted = add(c1, time_effect);
  const EffectReport shifted = otcic::did_estimate(make_panel(c0, c1_shifted, t0_shifted, t1_shifted));

  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(shifted.ate[k] == doctest::Approx(base.ate[k]).epsilon(1e-12));
  }
}

TEST_CASE("mean differencing sees no effect under parallel trends") {
  Rng rng(202);
  const std::size_t n = 2000;
  const std::vector<double> zero = {0.0};
  const std::vector<double> gamma = {1.5};
  const std::vector<double> tau = {-0.7};
  const std::vector<double> both = {0.8};
  const auto panel = make_panel(gaussian_rows(rng, n, 1, zero), gaussian_rows(rng, n, 1, tau),
                                gaussian_rows(rng, n, 1, gamma), gaussian_rows(rng, n, 1, both));
  const EffectReport report = otcic::did_estimate(panel);
  // Four independent cell means, each with standard error 1/sqrt(n).
  CHECK(std::abs(report.ate[0]) < 3.0 * 2.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("quantile composition is the identity when controls do not move") {
  const std::vector<std::vector<double>> c0 = {{0.0, 5.0}, {1.0, 6.0}, {2.0, 7.0}, {3.0, 8.0}};
  const std::vector<std::vector<double>> t0 = {{1.0, 8.0}, {3.0, 5.0}, {2.0, 7.0}};
  const std::vector<std::vector<double>> t1 = {{4.0, 9.0}, {5.0, 10.0}, {6.0, 11.0}};
  const auto [result, report] = otcic::cic_estimate(make_panel(c0, c0, t0, t1, true));

  REQUIRE(result.counterfactuals.size() == t0.size());
  for (std::size_t i = 0; i < t0.size(); ++i) {
    CHECK(result.counterfactuals.coord(i, 0) == t0[i][0]);
    CHECK(result.counterfactuals.coord(i, 1) == t0[i][1]);
  }
  CHECK(report.ate[0] == doctest::Approx(5.0 - 2.0).epsilon(1e-12));
  CHECK(report.ate[1] == doctest::Approx(10.0 - (8.0 + 5.0 + 7.0) / 3.0).epsilon(1e-12));
}

TEST_CASE("quantile composition tracks a coordinatewise location shift exactly") {
  const std::vector<std::vector<double>> c0 = {{0.0, 5.0}, {1.0, 6.0}, {2.0, 7.0}, {3.0, 8.0}};
  const std::vector<double> delta = {10.0, -2.0};
  std::vector<std::vector<double>> c1 = c0;
  for (auto& row : c1)
    for (std::size_t k = 0; k < 2; ++k) row[k] += delta[k];
  const std::vector<std::vector<double>> t0 = {{1.0, 8.0}, {3.0, 5.0}};
  const std::vector<std::vector<double>> t1 = {{0.0, 0.0}, {0.0, 0.0}};

  const auto [result, report] = otcic::cic_estimate(make_panel(c0, c1, t0, t1, true));
  for (std::size_t i = 0; i < t0.size(); ++i) {
    CHECK(result.counterfactuals.coord(i, 0) == t0[i][0] + delta[0]);
    CHECK(result.counterfactuals.coord(i, 1) == t0[i][1] + delta[1]);
  }
}

TEST_CASE("one-dimensional quantile composition on a hand-checked ladder") {
  const std::vector<std::vector<double>> c0 = {{0.0}, {1.0}, {2.0}, {3.0}};
  const std::vector<std::vector<double>> c1 = {{10.0}, {11.0}, {12.0}, {13.0}};
  const std::vector<std::vector<double>> t0 = {{1.0}, {3.0}};
  const std::vector<std::vector<double>> t1 = {{20.0}, {21.0}};
  const auto [result, report] = otcic::cic_estimate(make_panel(c0, c1, t0, t1, true));

  CHECK(result.counterfactuals.coord(0, 0) == 11.0);
  CHECK(result.counterfactuals.coord(1, 0) == 13.0);
  CHECK(report.ate[0] == doctest::Approx(20.5 - 12.0).epsilon(1e-12));
  REQUIRE(result.drift_map.has_value());
  REQUIRE(report.diagnostics.plan_cost.has_value());
  CHECK(*report.diagnostics.plan_cost == doctest::Approx(100.0).epsilon(1e-9));
}

TEST_CASE("transport counterfactuals live on the control post support") {
  Rng rng(203);
  const std::vector<double> zero = {0.0, 0.0};
  const std::vector<double> drift = {0.5, -0.25};
  const auto c0 = gaussian_rows(rng, 23, 2, zero);
  const auto c1 = gaussian_rows(rng, 31, 2, drift);
  const auto t0 = gaussian_rows(rng, 17, 2, zero);
  const auto t1 = gaussian_rows(rng, 17, 2, drift);
  const auto [result, report] = otcic::ot_cic_estimate(make_panel(c0, c1, t0, t1, true));

  for (std::size_t i = 0; i < result.counterfactuals.size(); ++i) {
    bool on_support = false;
    for (const auto& row : c1) {
      on_support = on_support || (result.counterfactuals.coord(i, 0) == row[0] &&
                                  result.counterfactuals.coord(i, 1) == row[1]);
    }
    CHECK(on_support);
  }
  CHECK(report.diagnostics.rounding == Rounding::mode);
  REQUIRE(report.diagnostics.plan_cost.has_value());
  CHECK(*report.diagnostics.plan_cost > 0.0);
}

TEST_CASE("transport counterfactuals are exact when nothing drifts") {
  const std::vector<std::vector<double>> c0 = {{0.0, 0.0}, {1.0, 2.0}, {4.0, 1.0}, {2.0, 5.0}};
  const std::vector<std::vector<double>> t0 = {{1.0, 2.0}, {2.0, 5.0}};
  const std::vector<std::vector<double>> t1 = {{3.0, 3.0}, {4.0, 6.0}};
  const auto [result, report] = otcic::ot_cic_estimate(make_panel(c0, c0, t0, t1, true));

  for (std::size_t i = 0; i < t0.size(); ++i) {
    CHECK(result.counterfactuals.coord(i, 0) == t0[i][0]);
    CHECK(result.counterfactuals.coord(i, 1) == t0[i][1]);
  }
  CHECK(report.ate[0] == doctest::Approx(3.5 - 1.5).epsilon(1e-12));
  CHECK(report.ate[1] == doctest::Approx(4.5 - 3.5).epsilon(1e-12));
}

TEST_CASE("per-unit effects average to the reported effect") {
  Rng rng(204);
  const std::vector<double> zero = {0.0, 0.0};
  const std::vector<double> drift = {1.0, 0.5};
  const auto c0 = gaussian_rows(rng, 29, 2, zero);
  const auto c1 = gaussian_rows(rng, 24, 2, drift);
  const auto t0 = gaussian_rows(rng, 37, 2, zero);
  const auto t1 = gaussian_rows(rng, 37, 2, drift);
  const PanelDataset panel = make_panel(c0, c1, t0, t1, true);

  for (int which = 0; which < 2; ++which) {
    const EffectReport report = which == 0 ? otcic::ot_cic_estimate(panel).second
                                           : otcic::cic_estimate(panel).second;
    REQUIRE(report.has_unit_effects());
    REQUIRE(report.unit_effects.size() == 37);
    REQUIRE(report.unit_ids.size() == 37);
    const auto mean = column_mean(report.unit_effects);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(std::abs(mean[k] - report.ate[k]) < 1e-8);
    }
  }
}

TEST_CASE("unit effects stay absent without full pairing") {
  Rng rng(205);
  const std::vector<double> zero = {0.0};
  const auto panel = make_panel(gaussian_rows(rng, 10, 1, zero), gaussian_rows(rng, 10, 1, zero),
                                gaussian_rows(rng, 8, 1, zero), gaussian_rows(rng, 8, 1, zero),
                                /*paired=*/false);
  CHECK_FALSE(otcic::ot_cic_estimate(panel).second.has_unit_effects());
  CHECK_FALSE(otcic::cic_estimate(panel).second.has_unit_effects());
}

TEST_CASE("requested couplings map treated outcomes onto the counterfactual support") {
  Rng rng(206);
  const std::vector<double> zero = {0.0, 0.0};
  const auto c0 = gaussian_rows(rng, 20, 2, zero);
  const auto c1 = gaussian_rows(rng, 20, 2, zero);
  const auto t0 = gaussian_rows(rng, 15, 2, zero);
  const auto t1 = gaussian_rows(rng, 15, 2, zero);
  const PanelDataset panel = make_panel(c0, c1, t0, t1, true);
  const auto [result, report] = otcic::ot_cic_estimate(panel);

  const PointCloud star = panel.cell(Group::treated, Period::post);
  const auto coupling = otcic::couple_counterfactuals(star, result.counterfactuals);
  REQUIRE(coupling.assignments().size() == star.size());
  for (std::size_t i = 0; i < star.size(); ++i) {
    CHECK(coupling.assignment(i) < result.counterfactuals.size());
  }
}

TEST_CASE("cell diagnostics echo the panel shape") {
  Rng rng(207);
  const std::vector<double> zero = {0.0};
  const auto panel = make_panel(gaussian_rows(rng, 5, 1, zero), gaussian_rows(rng, 7, 1, zero),
                                gaussian_rows(rng, 3, 1, zero), gaussian_rows(rng, 4, 1, zero));
  const EffectReport report = otcic::did_estimate(panel);
  CHECK(report.diagnostics.n_control_pre == 5);
  CHECK(report.diagnostics.n_control_post == 7);
  CHECK(report.diagnostics.n_treated_pre == 3);
  CHECK(report.diagnostics.n_treated_post == 4);
}
