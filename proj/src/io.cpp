#include "otcic/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <tuple>

namespace otcic::io {

namespace {

double parse_double_field(const std::string& field, std::size_t line, const std::string& column) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw std::invalid_argument("panel CSV line " + std::to_string(line) + ": column '" + column +
                                "' is not a finite number: '" + field + "'");
  }
  return value;
}

void append_fields(std::string& out, const std::vector<std::string>& fields) {
  out += csv_row(fields);
}

std::string fd(double value) { return format_double(value); }

json summary_json(const EffectSummary& s) {
  return json{{"mean", s.mean}, {"sd", s.sd}, {"min", s.min}, {"max", s.max}};
}

json optional_double(const std::optional<double>& value) {
  return value ? json(*value) : json(nullptr);
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 40> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw std::logic_error("double formatting failed");
  return std::string(buf.data(), ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::invalid_argument("cannot open file: " + path);
  std::string content((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  if (file.bad()) throw std::invalid_argument("cannot read file: " + path);
  return content;
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream file(tmp, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open file for writing: " + tmp);
    file.write(content.data(), static_cast<std::streamsize>(content.size()));
    file.flush();
    if (!file.good()) {
      std::remove(tmp.c_str());
      throw std::runtime_error("cannot write file: " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
  }
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (const char c : text) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string fnv1a64_hex(std::string_view text) {
  const std::uint64_t hash = fnv1a64(text);
  std::string out(16, '0');
  static constexpr char kDigits[] = "0123456789abcdef";
  for (int i = 0; i < 16; ++i) out[15 - i] = kDigits[(hash >> (4 * i)) & 0xF];
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool done = false;
    while (!done) {
      if (quoted) {
        if (i >= n) throw std::invalid_argument("unterminated quoted CSV field");
        const char c = text[i++];
        if (c != '"') {
          field += c;
        } else if (i < n && text[i] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
        continue;
      }
      if (i >= n) {
        row.push_back(std::move(field));
        done = true;
        continue;
      }
      const char c = text[i++];
      if (c == '"' && field.empty()) {
        quoted = true;
      } else if (c == ',') {
        row.push_back(std::move(field));
        field.clear();
      } else if (c == '\n') {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        row.push_back(std::move(field));
        done = true;
      } else {
        field += c;
      }
    }
    const bool blank = row.size() == 1 && row[0].empty();
    if (!blank) rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_field(std::string_view raw) {
  const bool needs_quoting = raw.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs_quoting) return std::string(raw);
  std::string out = "\"";
  for (const char c : raw) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += csv_field(fields[i]);
  }
  out += '\n';
  return out;
}

PanelDataset load_panel_csv(const std::string& path) {
  const std::string text = read_file(path);
  const auto rows = parse_csv(text);
  if (rows.empty()) throw std::invalid_argument("panel CSV is empty: " + path);

  const auto& header = rows[0];
  if (header.size() < 4 || header[0] != "id" || header[1] != "group" || header[2] != "period") {
    throw std::invalid_argument("panel CSV header must start with id,group,period: " + path);
  }
  const std::size_t dim = header.size() - 3;
  for (std::size_t k = 0; k < dim; ++k) {
    const std::string expected = "y" + std::to_string(k + 1);
    if (header[3 + k] != expected) {
      throw std::invalid_argument("panel CSV outcome columns must be y1..y" + std::to_string(dim) +
                                  ", found '" + header[3 + k] + "'");
    }
  }

  struct Parsed {
    std::string id;
    Group group;
    Period period;
    std::vector<double> outcome;
  };
  std::vector<Parsed> parsed;
  parsed.reserve(rows.size() - 1);
  std::map<std::tuple<std::string, int, int>, std::size_t> seen;
  std::map<std::pair<std::string, int>, std::pair<bool, bool>> periods_present;

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::size_t line = r + 1;
    if (row.size() != header.size()) {
      throw std::invalid_argument("panel CSV line " + std::to_string(line) + ": expected " +
                                  std::to_string(header.size()) + " fields, found " +
                                  std::to_string(row.size()));
    }
    Parsed p;
    p.id = row[0];
    if (p.id.empty()) {
      throw std::invalid_argument("panel CSV line " + std::to_string(line) + ": empty id");
    }
    if (row[1] == "control") {
      p.group = Group::control;
    } else if (row[1] == "treated") {
      p.group = Group::treated;
    } else {
      throw std::invalid_argument("panel CSV line " + std::to_string(line) +
                                  ": group must be control or treated, found '" + row[1] + "'");
    }
    if (row[2] == "pre") {
      p.period = Period::pre;
    } else if (row[2] == "post") {
      p.period = Period::post;
    } else {
      throw std::invalid_argument("panel CSV line " + std::to_string(line) +
                                  ": period must be pre or post, found '" + row[2] + "'");
    }
    p.outcome.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      p.outcome[k] = parse_double_field(row[3 + k], line, header[3 + k]);
    }

    const auto key = std::make_tuple(p.id, static_cast<int>(p.group), static_cast<int>(p.period));
    const auto [it, inserted] = seen.emplace(key, line);
    if (!inserted) {
      throw std::invalid_argument("panel CSV line " + std::to_string(line) + ": duplicate record for unit '" +
                                  p.id + "' (" + row[1] + ", " + row[2] + "), first seen on line " +
                                  std::to_string(it->second));
    }
    auto& present = periods_present[{p.id, static_cast<int>(p.group)}];
    (p.period == Period::pre ? present.first : present.second) = true;
    parsed.push_back(std::move(p));
  }

  std::vector<PanelRecord> records;
  records.reserve(parsed.size());
  for (auto& p : parsed) {
    PanelRecord rec;
    rec.unit_id = p.id;
    rec.group = p.group;
    rec.period = p.period;
    rec.outcome = std::move(p.outcome);
    const auto& present = periods_present[{p.id, static_cast<int>(p.group)}];
    if (present.first && present.second) rec.pair_id = p.id;
    records.push_back(std::move(rec));
  }
  return PanelDataset(std::move(records));
}

json effect_report_json(const EffectReport& report) {
  json j;
  j["estimator"] = to_string(report.estimator);
  j["ate"] = report.ate;
  if (report.qte) {
    j["qte"] = json{{"grid", report.qte->grid}, {"effects", report.qte->effects}};
  } else {
    j["qte"] = nullptr;
  }
  if (report.has_unit_effects()) {
    j["unit_effects"] = json{{"ids", report.unit_ids}, {"effects", report.unit_effects}};
  } else {
    j["unit_effects"] = nullptr;
  }
  const auto& d = report.diagnostics;
  j["diagnostics"] = json{{"n_control_pre", d.n_control_pre},   {"n_control_post", d.n_control_post},
                          {"n_treated_pre", d.n_treated_pre},   {"n_treated_post", d.n_treated_post},
                          {"plan_cost", optional_double(d.plan_cost)},
                          {"rounding", d.rounding ? json(to_string(*d.rounding)) : json(nullptr)}};
  return j;
}

json experiment_json(const SyntheticConfig& config, const ExperimentReport& report) {
  json j;
  j["config"] = json{{"n", config.n},
                     {"alpha", config.alpha},
                     {"seed", config.seed},
                     {"runs", config.runs},
                     {"mesh_points", config.mesh_points},
                     {"kde_bandwidth", config.kde_bandwidth},
                     {"kde_resolution", config.kde_resolution},
                     {"marginal_resolution", config.marginal_resolution},
                     {"lattice_mesh", config.lattice_mesh},
                     {"threads", config.threads}};
  j["mad_ot"] = json{{"mean", report.mean_mad_ot}, {"sd", report.sd_mad_ot}};
  j["mad_cic"] = json{{"mean", report.mean_mad_cic}, {"sd", report.sd_mad_cic}};
  json runs = json::array();
  for (std::size_t r = 0; r < report.per_run.size(); ++r) {
    runs.push_back(json{{"run", r}, {"mad_ot", report.per_run[r].mad_ot}, {"mad_cic", report.per_run[r].mad_cic}});
  }
  j["per_run"] = std::move(runs);
  return j;
}

json plan_json(const TransportPlan& plan) {
  json j;
  j["n"] = plan.source().size();
  j["m"] = plan.target().size();
  j["dim"] = plan.source().dim();
  j["cost"] = plan.cost();
  json entries = json::array();
  for (const auto& e : plan.entries()) {
    entries.push_back(json::array({e.source, e.target, e.mass}));
  }
  j["entries"] = std::move(entries);
  return j;
}

json table2_json(const Table2Result& result) {
  json j;
  j["did"] = effect_report_json(result.did);
  j["cic"] = effect_report_json(result.cic);
  j["ot"] = effect_report_json(result.ot);
  j["ot_barycentric"] = effect_report_json(result.ot_barycentric);
  return j;
}

json sweep_json(const SweepOptions& options, const SweepReport& report) {
  json j;
  j["options"] = json{{"fixed_sample", options.fixed_sample},
                      {"rounding", to_string(options.rounding)},
                      {"threads", options.threads}};
  j["subset_count"] = report.rows.size();
  json rows = json::array();
  for (const auto& row : report.rows) {
    json extras = json::array();
    for (const CkField f : row.extras) extras.push_back(to_string(f));
    rows.push_back(json{{"extras", std::move(extras)},
                        {"dimension", row.dimension},
                        {"n_control", row.n_control},
                        {"n_treated", row.n_treated},
                        {"te_ft", row.te_ft},
                        {"te_pt", row.te_pt}});
  }
  j["rows"] = std::move(rows);
  j["summary"] = json{{"te_ft", summary_json(report.ft)}, {"te_pt", summary_json(report.pt)}};
  json comparison = json::array();
  for (const auto& row : report.comparison) {
    comparison.push_back(json{{"method", row.method}, {"ate_ft", row.ate_ft}, {"ate_pt", row.ate_pt}});
  }
  j["comparison"] = std::move(comparison);
  return j;
}

json unit_drop_json(const UnitDropOptions& options, const UnitDropReport& report) {
  json j;
  j["options"] = json{{"drop_frac", options.drop_frac},
                      {"reps", options.reps},
                      {"seed", options.seed},
                      {"rounding", to_string(options.rounding)},
                      {"threads", options.threads}};
  j["summary"] = json{{"te_ft", summary_json(report.ft)}, {"te_pt", summary_json(report.pt)}};
  j["frac_ft_negative"] = report.frac_ft_negative;
  j["frac_pt_positive"] = report.frac_pt_positive;
  return j;
}

std::string per_run_csv(const ExperimentReport& report) {
  std::string out = "run,mad_ot,mad_cic\n";
  for (std::size_t r = 0; r < report.per_run.size(); ++r) {
    append_fields(out, {std::to_string(r), fd(report.per_run[r].mad_ot), fd(report.per_run[r].mad_cic)});
  }
  return out;
}

std::string marginals_csv(const ExperimentReport& report) {
  std::string out = "coord,x,ecdf_true,ecdf_ot,ecdf_cic\n";
  for (const auto& row : report.marginals) {
    append_fields(out, {std::to_string(row.coord + 1), fd(row.x), fd(row.ecdf_true), fd(row.ecdf_ot),
                        fd(row.ecdf_cic)});
  }
  return out;
}

std::string kde_csv(const ExperimentReport& report) {
  std::string out = "surface,x,y,density\n";
  const auto emit = [&out](const char* name, const KdeGrid& grid) {
    for (std::size_t j = 0; j < grid.ys.size(); ++j) {
      for (std::size_t i = 0; i < grid.xs.size(); ++i) {
        append_fields(out, {name, fd(grid.xs[i]), fd(grid.ys[j]), fd(grid.density[j * grid.xs.size() + i])});
      }
    }
  };
  emit("true", report.kde_true);
  emit("ot", report.kde_ot);
  emit("cic", report.kde_cic);
  return out;
}

std::string mesh_quantiles_csv(const ExperimentReport& report) {
  std::string out = "level,ecdf_true,ecdf_ot,ecdf_cic\n";
  for (const auto& row : report.mesh_quantiles) {
    append_fields(out, {fd(row.level), fd(row.ecdf_true), fd(row.ecdf_ot), fd(row.ecdf_cic)});
  }
  return out;
}

std::string qte_csv(const EffectReport& report) {
  if (!report.qte) throw std::logic_error("effect report has no quantile curve to serialize");
  const auto& qte = *report.qte;
  const std::size_t dim = qte.effects.empty() ? 0 : qte.effects[0].size();
  std::string out = "q";
  for (std::size_t k = 0; k < dim; ++k) out += ",effect_" + std::to_string(k + 1);
  out += '\n';
  for (std::size_t i = 0; i < qte.grid.size(); ++i) {
    out += fd(qte.grid[i]);
    for (std::size_t k = 0; k < dim; ++k) out += ',' + fd(qte.effects[i][k]);
    out += '\n';
  }
  return out;
}

std::string counterfactuals_csv(const CounterfactualResult& result) {
  const std::size_t dim = result.counterfactuals.dim();
  std::string out = "unit";
  for (std::size_t k = 0; k < dim; ++k) out += ",pre_" + std::to_string(k + 1);
  out += ",matched_control";
  for (std::size_t k = 0; k < dim; ++k) out += ",cf_" + std::to_string(k + 1);
  out += '\n';
  for (std::size_t i = 0; i < result.per_unit.size(); ++i) {
    const auto& unit = result.per_unit[i];
    out += std::to_string(i);
    for (std::size_t k = 0; k < dim; ++k) out += ',' + fd(unit.pre_outcome[k]);
    out += ',';
    if (unit.matched_control) out += std::to_string(*unit.matched_control);
    for (std::size_t k = 0; k < dim; ++k) out += ',' + fd(unit.counterfactual[k]);
    out += '\n';
  }
  return out;
}

std::string unit_effects_csv(const EffectReport& report) {
  if (!report.has_unit_effects()) throw std::logic_error("effect report has no unit effects to serialize");
  const std::size_t dim = report.unit_effects[0].size();
  std::string out = "unit";
  for (std::size_t k = 0; k < dim; ++k) out += ",effect_" + std::to_string(k + 1);
  out += '\n';
  for (std::size_t i = 0; i < report.unit_effects.size(); ++i) {
    out += csv_field(report.unit_ids[i]);
    for (std::size_t k = 0; k < dim; ++k) out += ',' + fd(report.unit_effects[i][k]);
    out += '\n';
  }
  return out;
}

std::string coupling_csv(const TransportMap& map) {
  std::string out = "treated_post,counterfactual\n";
  const auto& assignments = map.assignments();
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    append_fields(out, {std::to_string(i), std::to_string(assignments[i])});
  }
  return out;
}

std::string quantile_curves_csv(const std::vector<QuantileCurveRow>& rows) {
  std::string out = "coord,q,treated,counterfactual\n";
  for (const auto& row : rows) {
    append_fields(out, {std::to_string(row.coord + 1), fd(row.q), fd(row.treated), fd(row.counterfactual)});
  }
  return out;
}

std::string conditional_bands_csv(const std::vector<ConditionalBandRow>& rows) {
  std::string out = "fixed_coord,band,q,n_treated,n_counterfactual,treated,counterfactual\n";
  for (const auto& row : rows) {
    append_fields(out, {std::to_string(row.fixed_coord + 1), fd(row.band), fd(row.q),
                        std::to_string(row.n_treated), std::to_string(row.n_counterfactual),
                        fd(row.treated), fd(row.counterfactual)});
  }
  return out;
}

std::string ck_unit_effects_csv(const std::vector<UnitEffectRow>& rows) {
  std::string out = "unit,pre_ft,pre_pt,post_ft,post_pt,cf_ft,cf_pt,effect_ft,effect_pt\n";
  for (const auto& row : rows) {
    append_fields(out, {row.unit, fd(row.pre_ft), fd(row.pre_pt), fd(row.post_ft), fd(row.post_pt),
                        fd(row.cf_ft), fd(row.cf_pt), fd(row.effect_ft), fd(row.effect_pt)});
  }
  return out;
}

std::string sweep_rows_csv(const std::vector<SweepRow>& rows) {
  std::string out = "extras,dimension,n_control,n_treated,te_ft,te_pt\n";
  for (const auto& row : rows) {
    std::string extras;
    for (std::size_t i = 0; i < row.extras.size(); ++i) {
      if (i > 0) extras += '+';
      extras += to_string(row.extras[i]);
    }
    append_fields(out, {extras, std::to_string(row.dimension), std::to_string(row.n_control),
                        std::to_string(row.n_treated), fd(row.te_ft), fd(row.te_pt)});
  }
  return out;
}

std::string unit_drop_csv(const UnitDropReport& report) {
  std::string out = "rep,te_ft,te_pt\n";
  for (std::size_t r = 0; r < report.te_ft.size(); ++r) {
    append_fields(out, {std::to_string(r), fd(report.te_ft[r]), fd(report.te_pt[r])});
  }
  return out;
}

void write_manifest(const std::string& dir, const json& config,
                    const std::vector<std::pair<std::string, std::string>>& inputs,
                    const std::vector<std::string>& outputs) {
  json j;
  j["version"] = kVersion;
  j["config"] = config;
  json in = json::array();
  for (const auto& [name, checksum] : inputs) {
    in.push_back(json{{"path", name}, {"fnv1a64", checksum}});
  }
  j["inputs"] = std::move(in);
  std::vector<std::string> names = outputs;
  std::sort(names.begin(), names.end());
  json out = json::array();
  for (const auto& name : names) {
    const std::string content = read_file(dir + "/" + name);
    out.push_back(json{{"file", name}, {"bytes", content.size()}, {"fnv1a64", fnv1a64_hex(content)}});
  }
  j["outputs"] = std::move(out);
  write_file_atomic(dir + "/manifest.json", j.dump(2) + "\n");
}

}  // namespace otcic::io
