#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "otcic/estimators.hpp"
#include "otcic/panel.hpp"

namespace otcic {

inline constexpr std::size_t kCkFieldCount = 10;

// Survey fields in canonical coordinate order: the two employment outcomes
// first, then the eight numeric covariates.
enum class CkField : std::size_t {
  empft,
  emppt,
  pctaff,
  nmgrs,
  inctime,
  pentree,
  psoda,
  nregs,
  open,
  hrsopen,
};

const char* to_string(CkField f);
// Uppercase column names only ("EMPFT", ..., "HRSOPEN"); nullopt otherwise.
std::optional<CkField> parse_ck_field(std::string_view name);

struct CkValue {
  double value = 0.0;
  bool present = false;
};

// One restaurant's survey responses across both interview waves.
struct CkRecord {
  // Unique unit key. Survey sheet numbers repeat for a handful of rows; later
  // occurrences get an "r<row>" suffix so pair ids stay unique.
  std::string sheet;
  bool treated = false;  // New Jersey store (Pennsylvania is the control)
  std::array<std::array<CkValue, 2>, kCkFieldCount> values{};

  const CkValue& at(CkField f, int wave) const {
    return values[static_cast<std::size_t>(f)][wave];
  }
};

// Reads the converted survey CSV (layout in docs/data-format.md: SHEET,
// STATE, the ten wave-1 columns, then the ten wave-2 columns with a `2`
// suffix). Missing entries are "." or empty. Throws std::invalid_argument
// naming the first bad row. An empty file yields an empty list plus a
// warning on stderr.
std::vector<CkRecord> load_ck(const std::string& path);

// Full-time-equivalent employment.
inline double fte(double ft, double pt) { return ft + 0.5 * pt; }

// Outcome-only panel in raw employee counts: units with both employment
// outcomes present in both waves, pair_id = sheet.
PanelDataset bivariate_panel(const std::vector<CkRecord>& records);

// A standardized panel plus the affine transform that undoes it.
struct CovariatePanel {
  PanelDataset panel;
  std::vector<CkField> columns;  // outcomes, then the chosen extras in order
  std::vector<double> means;     // pooled over retained units and both waves
  std::vector<double> sds;       // population convention; 1 when degenerate
  std::size_t n_control = 0;     // units per group
  std::size_t n_treated = 0;
};

// Units complete on the outcomes and every chosen extra covariate in both
// waves, each coordinate standardized to zero mean and unit sd pooled across
// groups and periods. Duplicate extras or outcome fields passed as extras
// are rejected.
CovariatePanel covariate_panel(const std::vector<CkRecord>& records,
                               std::vector<CkField> extras);

// Scale-only conversion of standardized effect vectors back to raw units.
std::vector<double> raw_effects(const CovariatePanel& cp,
                                const std::vector<double>& std_effects);
// Full affine inverse for one coordinate: value * sd + mean.
double destandardize(const CovariatePanel& cp, std::size_t column, double value);

// Post-period marginal quantiles of the treated outcomes against their
// counterfactuals, per coordinate (0 = full-time, 1 = part-time).
struct QuantileCurveRow {
  std::size_t coord = 0;
  double q = 0.0;
  double treated = 0.0;
  double counterfactual = 0.0;
};

// Quartiles of one outcome among units whose other outcome lies in a
// unit-width band centered on an integer count. Rows exist only for bands
// populated in both samples.
struct ConditionalBandRow {
  std::size_t fixed_coord = 0;
  double band = 0.0;
  double q = 0.0;
  std::size_t n_treated = 0;
  std::size_t n_counterfactual = 0;
  double treated = 0.0;
  double counterfactual = 0.0;
};

struct UnitEffectRow {
  std::string unit;
  double pre_ft = 0.0;
  double pre_pt = 0.0;
  double post_ft = 0.0;
  double post_pt = 0.0;
  double cf_ft = 0.0;
  double cf_pt = 0.0;
  double effect_ft = 0.0;
  double effect_pt = 0.0;
};

struct Table2Result {
  EffectReport did;
  EffectReport cic;
  EffectReport ot;              // mode rounding
  EffectReport ot_barycentric;  // same plan, barycentric rounding
  std::vector<QuantileCurveRow> quantile_curves;
  std::vector<ConditionalBandRow> conditional_bands;
  std::vector<UnitEffectRow> unit_effects;  // one row per treated unit
};

// The headline bivariate analysis: all three estimators on the outcome-only
// panel, plus quantile-curve and unit-effect plot data from the transport
// estimate.
Table2Result run_table2(const std::vector<CkRecord>& records);

struct SweepOptions {
  // Reuse the all-covariate-complete unit set for every subset instead of
  // refiltering per subset.
  bool fixed_sample = false;
  Rounding rounding = Rounding::mode;
  unsigned threads = 1;
};

struct SweepRow {
  std::vector<CkField> extras;
  std::size_t dimension = 0;  // 2 + extras.size()
  std::size_t n_control = 0;
  std::size_t n_treated = 0;
  double te_ft = 0.0;  // raw employee units
  double te_pt = 0.0;
};

struct EffectSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample convention
  double min = 0.0;
  double max = 0.0;
};

struct ComparisonRow {
  std::string method;
  double ate_ft = 0.0;
  double ate_pt = 0.0;
};

struct SweepReport {
  std::vector<SweepRow> rows;  // extras subsets of sizes 6, 7, 8 (37 total)
  EffectSummary ft;
  EffectSummary pt;
  // Subset mean next to the outcome-only estimators evaluated on the
  // all-covariate-complete units.
  std::vector<ComparisonRow> comparison;
};

// Transport estimates over every admissible covariate subset, summarized.
SweepReport run_covariate_sweep(const std::vector<CkRecord>& records,
                                const SweepOptions& options = {});

struct UnitDropOptions {
  double drop_frac = 0.2;
  std::size_t reps = 10000;
  std::uint64_t seed = 1;
  Rounding rounding = Rounding::mode;
  unsigned threads = 1;
};

struct UnitDropReport {
  std::vector<double> te_ft;  // raw units, one entry per rep
  std::vector<double> te_pt;
  EffectSummary ft;
  EffectSummary pt;
  double frac_ft_negative = 0.0;  // sign-flip rates across reps
  double frac_pt_positive = 0.0;
};

// Robustness to unit deletion: per rep, drop round(drop_frac * n) units from
// each group of the all-covariate-complete sample (seeded), re-standardize,
// and rerun the 10-dimensional transport estimate. Bit-reproducible for a
// given seed; rejects drops that would empty a group.
UnitDropReport run_unit_drop(const std::vector<CkRecord>& records,
                             const UnitDropOptions& options = {});

}  // namespace otcic
