#include "otcic/ck.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "otcic/kahan.hpp"
#include "otcic/parallel.hpp"
#include "otcic/rng.hpp"

namespace otcic {

namespace {

constexpr std::array<CkField, 8> kExtras = {
    CkField::pctaff, CkField::nmgrs, CkField::inctime, CkField::pentree,
    CkField::psoda,  CkField::nregs, CkField::open,    CkField::hrsopen};

std::vector<CkField> all_columns() {
  std::vector<CkField> columns = {CkField::empft, CkField::emppt};
  columns.insert(columns.end(), kExtras.begin(), kExtras.end());
  return columns;
}

bool record_complete(const CkRecord& rec, const std::vector<CkField>& columns) {
  for (CkField f : columns)
    if (!rec.at(f, 0).present || !rec.at(f, 1).present) return false;
  return true;
}

std::vector<CkRecord> complete_records(const std::vector<CkRecord>& records,
                                       const std::vector<CkField>& columns) {
  std::vector<CkRecord> kept;
  for (const CkRecord& rec : records)
    if (record_complete(rec, columns)) kept.push_back(rec);
  return kept;
}

// Extras subsets of sizes 8, 7, 6, each size enumerated in lexicographic
// index order: 1 + 8 + 28 = 37 subsets.
std::vector<std::vector<CkField>> extras_subsets() {
  std::vector<std::vector<CkField>> subsets;
  for (std::size_t size = kExtras.size(); size + 2 >= 8; --size) {
    std::vector<std::size_t> idx(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    for (;;) {
      std::vector<CkField> subset(size);
      for (std::size_t i = 0; i < size; ++i) subset[i] = kExtras[idx[i]];
      subsets.push_back(std::move(subset));
      // Advance to the next combination of {0..7} choose size.
      std::size_t i = size;
      while (i > 0 && idx[i - 1] == kExtras.size() - size + (i - 1)) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return subsets;
}

EffectSummary summarize(const std::vector<double>& values) {
  EffectSummary s;
  Kahan sum;
  s.min = values.front();
  s.max = values.front();
  for (double v : values) {
    sum.add(v);
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  const double n = static_cast<double>(values.size());
  s.mean = sum.sum / n;
  if (values.size() > 1) {
    Kahan var;
    for (double v : values) var.add((v - s.mean) * (v - s.mean));
    s.sd = std::sqrt(var.sum / (n - 1.0));
  }
  return s;
}

double quantile_of_sorted_values(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double raw = std::ceil(q * static_cast<double>(values.size()) - 1e-12);
  std::size_t k = raw < 1.0 ? 1 : static_cast<std::size_t>(raw);
  if (k > values.size()) k = values.size();
  return values[k - 1];
}

}  // namespace

Table2Result run_table2(const std::vector<CkRecord>& records) {
  const PanelDataset panel = bivariate_panel(records);

  EffectReport did = did_estimate(panel);
  auto [cic_result, cic] = cic_estimate(panel);
  auto [ot_result, ot] = ot_cic_estimate(panel, Rounding::mode);
  EffectReport otb = ot_cic_estimate(panel, Rounding::barycentric).second;

  Table2Result out{std::move(did), std::move(cic), std::move(ot), std::move(otb),
                   {},             {},             {}};

  const PointCloud treated_post = panel.cell(Group::treated, Period::post);
  const PointCloud& cf = ot_result.counterfactuals;

  for (std::size_t coord = 0; coord < 2; ++coord) {
    const std::vector<double> observed = treated_post.coordinate(coord);
    const std::vector<double> counter = cf.coordinate(coord);
    for (double q : qte_grid())
      out.quantile_curves.push_back({coord, q,
                                     quantile_of_sorted_values(observed, q),
                                     quantile_of_sorted_values(counter, q)});
  }

  // Conditional quartiles: hold one outcome inside a unit-width band around
  // an integer count, look at the other outcome's distribution in the band.
  for (std::size_t fixed = 0; fixed < 2; ++fixed) {
    const std::size_t free = 1 - fixed;
    std::map<long long, std::vector<double>> treated_bands;
    std::map<long long, std::vector<double>> counter_bands;
    for (std::size_t i = 0; i < treated_post.size(); ++i)
      treated_bands[std::llround(treated_post.coord(i, fixed))].push_back(
          treated_post.coord(i, free));
    for (std::size_t i = 0; i < cf.size(); ++i)
      counter_bands[std::llround(cf.coord(i, fixed))].push_back(cf.coord(i, free));
    for (const auto& [band, treated_values] : treated_bands) {
      const auto hit = counter_bands.find(band);
      if (hit == counter_bands.end()) continue;
      for (double q : {0.25, 0.5, 0.75})
        out.conditional_bands.push_back({fixed, static_cast<double>(band), q,
                                         treated_values.size(), hit->second.size(),
                                         quantile_of_sorted_values(treated_values, q),
                                         quantile_of_sorted_values(hit->second, q)});
    }
  }

  // Per-unit scatter rows. Unit effects and per-unit counterfactuals are
  // both in treated-pre cell order because the panel is fully paired.
  for (std::size_t i = 0; i < out.ot.unit_effects.size(); ++i) {
    const UnitCounterfactual& u = ot_result.per_unit[i];
    const std::vector<double>& effect = out.ot.unit_effects[i];
    out.unit_effects.push_back({out.ot.unit_ids[i], u.pre_outcome[0], u.pre_outcome[1],
                                u.counterfactual[0] + effect[0],
                                u.counterfactual[1] + effect[1], u.counterfactual[0],
                                u.counterfactual[1], effect[0], effect[1]});
  }
  return out;
}

SweepReport run_covariate_sweep(const std::vector<CkRecord>& records,
                                const SweepOptions& options) {
  const std::vector<CkRecord> complete = complete_records(records, all_columns());
  const std::vector<CkRecord>& base = options.fixed_sample ? complete : records;

  const std::vector<std::vector<CkField>> subsets = extras_subsets();
  SweepReport report;
  report.rows.assign(subsets.size(), SweepRow{});

  parallel_for(subsets.size(), options.threads, [&](std::size_t s) {
    const CovariatePanel cp = covariate_panel(base, subsets[s]);
    const EffectReport effects = ot_cic_estimate(cp.panel, options.rounding).second;
    const std::vector<double> raw = raw_effects(cp, effects.ate);
    report.rows[s] = SweepRow{subsets[s], cp.columns.size(), cp.n_control,
                              cp.n_treated, raw[0], raw[1]};
  });

  std::vector<double> ft;
  std::vector<double> pt;
  for (const SweepRow& row : report.rows) {
    ft.push_back(row.te_ft);
    pt.push_back(row.te_pt);
  }
  report.ft = summarize(ft);
  report.pt = summarize(pt);

  // Outcome-only estimators on the covariate-complete units, for the
  // with/without-covariates comparison.
  const PanelDataset outcome_panel = bivariate_panel(complete);
  const EffectReport did = did_estimate(outcome_panel);
  const EffectReport cic = cic_estimate(outcome_panel).second;
  const EffectReport ot = ot_cic_estimate(outcome_panel, options.rounding).second;
  report.comparison = {{"mean_ot_covariates", report.ft.mean, report.pt.mean},
                       {"ot", ot.ate[0], ot.ate[1]},
                       {"cic", cic.ate[0], cic.ate[1]},
                       {"did", did.ate[0], did.ate[1]}};
  return report;
}

UnitDropReport run_unit_drop(const std::vector<CkRecord>& records,
                             const UnitDropOptions& options) {
  if (!(options.drop_frac >= 0.0 && options.drop_frac < 1.0))
    throw std::invalid_argument("drop fraction must lie in [0, 1)");
  if (options.reps < 1) throw std::invalid_argument("need at least one repetition");

  const std::vector<CkRecord> complete = complete_records(records, all_columns());
  std::vector<CkRecord> control;
  std::vector<CkRecord> treated;
  for (const CkRecord& rec : complete)
    (rec.treated ? treated : control).push_back(rec);
  if (control.empty() || treated.empty())
    throw std::invalid_argument("need covariate-complete units in both groups");

  const auto drop_count = [&](std::size_t n) {
    return static_cast<std::size_t>(
        std::llround(options.drop_frac * static_cast<double>(n)));
  };
  const std::size_t drop_control = drop_count(control.size());
  const std::size_t drop_treated = drop_count(treated.size());
  if (drop_control >= control.size() || drop_treated >= treated.size())
    throw std::invalid_argument("dropping that fraction would empty a group");

  const std::vector<CkField> extras(kExtras.begin(), kExtras.end());
  UnitDropReport report;
  report.te_ft.assign(options.reps, 0.0);
  report.te_pt.assign(options.reps, 0.0);

  parallel_for(options.reps, options.threads, [&](std::size_t rep) {
    Rng rng(derive_seed(options.seed, rep));
    std::vector<bool> drop_c(control.size(), false);
    for (std::uint32_t i : rng.sample_without_replacement(
             static_cast<std::uint32_t>(control.size()),
             static_cast<std::uint32_t>(drop_control)))
      drop_c[i] = true;
    std::vector<bool> drop_t(treated.size(), false);
    for (std::uint32_t i : rng.sample_without_replacement(
             static_cast<std::uint32_t>(treated.size()),
             static_cast<std::uint32_t>(drop_treated)))
      drop_t[i] = true;

    std::vector<CkRecord> kept;
    kept.reserve(control.size() + treated.size() - drop_control - drop_treated);
    for (std::size_t i = 0; i < control.size(); ++i)
      if (!drop_c[i]) kept.push_back(control[i]);
    for (std::size_t i = 0; i < treated.size(); ++i)
      if (!drop_t[i]) kept.push_back(treated[i]);

    const CovariatePanel cp = covariate_panel(kept, extras);
    const EffectReport effects = ot_cic_estimate(cp.panel, options.rounding).second;
    const std::vector<double> raw = raw_effects(cp, effects.ate);
    report.te_ft[rep] = raw[0];
    report.te_pt[rep] = raw[1];
  });

  report.ft = summarize(report.te_ft);
  report.pt = summarize(report.te_pt);
  std::size_t ft_neg = 0;
  std::size_t pt_pos = 0;
  for (std::size_t rep = 0; rep < options.reps; ++rep) {
    if (report.te_ft[rep] < 0.0) ++ft_neg;
    if (report.te_pt[rep] > 0.0) ++pt_pos;
  }
  report.frac_ft_negative = static_cast<double>(ft_neg) / static_cast<double>(options.reps);
  report.frac_pt_positive = static_cast<double>(pt_pos) / static_cast<double>(options.reps);
  return report;
}

}  // namespace otcic
