#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "otcic/ck.hpp"
#include "otcic/estimators.hpp"
#include "otcic/synthetic.hpp"
#include "otcic/transport.hpp"

namespace otcic::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

// Throws std::invalid_argument when the file cannot be opened (callers treat
// missing inputs as usage errors).
std::string read_file(const std::string& path);

// Writes through a temporary file in the same directory, then renames, so a
// reader never sees a partial file.
void write_file_atomic(const std::string& path, std::string_view content);

std::uint64_t fnv1a64(std::string_view text);
std::string fnv1a64_hex(std::string_view text);  // 16 lowercase hex digits

// Minimal CSV: comma-separated, double-quote quoting with "" escapes,
// tolerates trailing \r. Blank lines and a trailing newline do not produce
// rows.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::string csv_field(std::string_view raw);
std::string csv_row(const std::vector<std::string>& fields);

// Panel CSV with header id,group,period,y1..yd. group is control|treated,
// period is pre|post. A unit id with exactly one pre and one post row within
// a group becomes pair-linked; a duplicated (id, group, period) row is
// rejected. Throws std::invalid_argument naming the first bad row.
PanelDataset load_panel_csv(const std::string& path);

json effect_report_json(const EffectReport& report);
json experiment_json(const SyntheticConfig& config, const ExperimentReport& report);
json plan_json(const TransportPlan& plan);
json table2_json(const Table2Result& result);
json sweep_json(const SweepOptions& options, const SweepReport& report);
json unit_drop_json(const UnitDropOptions& options, const UnitDropReport& report);

std::string per_run_csv(const ExperimentReport& report);
std::string marginals_csv(const ExperimentReport& report);
std::string kde_csv(const ExperimentReport& report);
std::string mesh_quantiles_csv(const ExperimentReport& report);
std::string qte_csv(const EffectReport& report);
std::string counterfactuals_csv(const CounterfactualResult& result);
std::string unit_effects_csv(const EffectReport& report);
std::string coupling_csv(const TransportMap& map);
std::string quantile_curves_csv(const std::vector<QuantileCurveRow>& rows);
std::string conditional_bands_csv(const std::vector<ConditionalBandRow>& rows);
std::string ck_unit_effects_csv(const std::vector<UnitEffectRow>& rows);
std::string sweep_rows_csv(const std::vector<SweepRow>& rows);
std::string unit_drop_csv(const UnitDropReport& report);

// Writes <dir>/manifest.json describing a finished run: resolved config,
// input checksums, tool version, and a checksum per output file (read back
// from dir). Contains no timestamps, so identical runs produce identical
// manifests.
void write_manifest(const std::string& dir, const json& config,
                    const std::vector<std::pair<std::string, std::string>>& inputs,
                    const std::vector<std::string>& outputs);

}  // namespace otcic::io
