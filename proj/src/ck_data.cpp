#include "otcic/ck.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iostream>
#include <stdexcept>
#include <unordered_map>

#include "otcic/io.hpp"
#include "otcic/kahan.hpp"

namespace otcic {

namespace {

constexpr std::array<const char*, kCkFieldCount> kFieldNames = {
    "EMPFT", "EMPPT",   "PCTAFF", "NMGRS", "INCTIME",
    "PENTREE", "PSODA", "NREGS",  "OPEN",  "HRSOPEN"};

std::string trimmed(std::string_view raw) {
  std::size_t b = 0;
  std::size_t e = raw.size();
  while (b < e && (raw[b] == ' ' || raw[b] == '\t' || raw[b] == '\r')) ++b;
  while (e > b && (raw[e - 1] == ' ' || raw[e - 1] == '\t' || raw[e - 1] == '\r')) --e;
  return std::string(raw.substr(b, e - b));
}

[[noreturn]] void bad_row(std::size_t line, const std::string& what) {
  throw std::invalid_argument("survey CSV line " + std::to_string(line) + ": " + what);
}

CkValue parse_value(const std::string& cell, std::size_t line, const char* column) {
  if (cell.empty() || cell == ".") return CkValue{};
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value))
    bad_row(line, std::string("cannot parse ") + column + " value '" + cell + "'");
  return CkValue{value, true};
}

bool complete_on(const CkRecord& rec, const std::vector<CkField>& columns) {
  for (CkField f : columns)
    if (!rec.at(f, 0).present || !rec.at(f, 1).present) return false;
  return true;
}

}  // namespace

const char* to_string(CkField f) { return kFieldNames[static_cast<std::size_t>(f)]; }

std::optional<CkField> parse_ck_field(std::string_view name) {
  for (std::size_t i = 0; i < kCkFieldCount; ++i)
    if (name == kFieldNames[i]) return static_cast<CkField>(i);
  return std::nullopt;
}

std::vector<CkRecord> load_ck(const std::string& path) {
  const std::string text = io::read_file(path);
  const std::vector<std::vector<std::string>> rows = io::parse_csv(text);
  if (rows.empty()) {
    std::cerr << "warning: " << path << " is empty; no survey records loaded\n";
    return {};
  }

  std::vector<std::string> expected = {"SHEET", "STATE"};
  for (const char* name : kFieldNames) expected.emplace_back(name);
  for (const char* name : kFieldNames) expected.emplace_back(std::string(name) + "2");
  std::vector<std::string> header;
  header.reserve(rows.front().size());
  for (const std::string& cell : rows.front()) header.push_back(trimmed(cell));
  if (header != expected)
    throw std::invalid_argument("survey CSV " + path +
                                " does not have the documented 22-column header");

  std::vector<CkRecord> records;
  records.reserve(rows.size() - 1);
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t line = r + 1;
    const std::vector<std::string>& row = rows[r];
    if (row.size() != expected.size())
      bad_row(line, "expected " + std::to_string(expected.size()) + " fields, found " +
                        std::to_string(row.size()));

    CkRecord rec;
    rec.sheet = trimmed(row[0]);
    if (rec.sheet.empty()) bad_row(line, "empty SHEET id");
    // Survey sheet numbers are not unique; qualify repeats so they can serve
    // as pair ids.
    if (seen.count(rec.sheet)) rec.sheet += "r" + std::to_string(line);
    seen.emplace(rec.sheet, line);

    const std::string state = trimmed(row[1]);
    if (state == "NJ" || state == "1") rec.treated = true;
    else if (state == "PA" || state == "0") rec.treated = false;
    else bad_row(line, "STATE must be NJ, PA, 1, or 0; found '" + state + "'");

    for (std::size_t f = 0; f < kCkFieldCount; ++f) {
      rec.values[f][0] = parse_value(trimmed(row[2 + f]), line, kFieldNames[f]);
      rec.values[f][1] =
          parse_value(trimmed(row[2 + kCkFieldCount + f]), line, kFieldNames[f]);
    }
    for (std::size_t f = 0; f < 2; ++f)
      for (int wave = 0; wave < 2; ++wave)
        if (rec.values[f][wave].present && rec.values[f][wave].value < 0.0)
          bad_row(line, std::string("negative employment count in ") + kFieldNames[f]);

    records.push_back(std::move(rec));
  }
  return records;
}

PanelDataset bivariate_panel(const std::vector<CkRecord>& records) {
  const std::vector<CkField> outcomes = {CkField::empft, CkField::emppt};
  std::vector<PanelRecord> panel;
  for (const CkRecord& rec : records) {
    if (!complete_on(rec, outcomes)) continue;
    const Group group = rec.treated ? Group::treated : Group::control;
    for (int wave = 0; wave < 2; ++wave)
      panel.push_back(PanelRecord{
          rec.sheet, group, wave == 0 ? Period::pre : Period::post,
          {rec.at(CkField::empft, wave).value, rec.at(CkField::emppt, wave).value},
          rec.sheet});
  }
  if (panel.empty())
    throw std::invalid_argument("no survey units have complete employment outcomes");
  return PanelDataset(std::move(panel));
}

CovariatePanel covariate_panel(const std::vector<CkRecord>& records,
                               std::vector<CkField> extras) {
  for (CkField f : extras)
    if (f == CkField::empft || f == CkField::emppt)
      throw std::invalid_argument("outcomes are always included; pass extras only");
  std::sort(extras.begin(), extras.end());
  if (std::adjacent_find(extras.begin(), extras.end()) != extras.end())
    throw std::invalid_argument("duplicate covariate in subset");

  std::vector<CkField> columns = {CkField::empft, CkField::emppt};
  columns.insert(columns.end(), extras.begin(), extras.end());
  const std::size_t d = columns.size();

  std::vector<const CkRecord*> kept;
  for (const CkRecord& rec : records)
    if (complete_on(rec, columns)) kept.push_back(&rec);
  if (kept.empty())
    throw std::invalid_argument("no survey units are complete on the chosen covariates");

  // Pooled first and second moments over both waves of every retained unit.
  std::vector<double> means(d);
  std::vector<double> sds(d);
  const double count = static_cast<double>(2 * kept.size());
  for (std::size_t k = 0; k < d; ++k) {
    Kahan sum;
    for (const CkRecord* rec : kept)
      for (int wave = 0; wave < 2; ++wave) sum.add(rec->at(columns[k], wave).value);
    means[k] = sum.sum / count;
    Kahan var;
    for (const CkRecord* rec : kept)
      for (int wave = 0; wave < 2; ++wave) {
        const double diff = rec->at(columns[k], wave).value - means[k];
        var.add(diff * diff);
      }
    sds[k] = std::sqrt(var.sum / count);
    if (sds[k] < 1e-12) sds[k] = 1.0;
  }

  std::size_t n_control = 0;
  std::size_t n_treated = 0;
  std::vector<PanelRecord> panel;
  panel.reserve(2 * kept.size());
  for (const CkRecord* rec : kept) {
    (rec->treated ? n_treated : n_control) += 1;
    const Group group = rec->treated ? Group::treated : Group::control;
    for (int wave = 0; wave < 2; ++wave) {
      std::vector<double> outcome(d);
      for (std::size_t k = 0; k < d; ++k)
        outcome[k] = (rec->at(columns[k], wave).value - means[k]) / sds[k];
      panel.push_back(PanelRecord{rec->sheet, group,
                                  wave == 0 ? Period::pre : Period::post,
                                  std::move(outcome), rec->sheet});
    }
  }
  return CovariatePanel{PanelDataset(std::move(panel)), std::move(columns),
                        std::move(means), std::move(sds), n_control, n_treated};
}

std::vector<double> raw_effects(const CovariatePanel& cp,
                                const std::vector<double>& std_effects) {
  if (std_effects.size() != cp.sds.size())
    throw std::invalid_argument("effect vector does not match the panel dimension");
  std::vector<double> raw(std_effects.size());
  for (std::size_t k = 0; k < raw.size(); ++k) raw[k] = std_effects[k] * cp.sds[k];
  return raw;
}

double destandardize(const CovariatePanel& cp, std::size_t column, double value) {
  if (column >= cp.sds.size()) throw std::invalid_argument("column out of range");
  return value * cp.sds[column] + cp.means[column];
}

}  // namespace otcic
