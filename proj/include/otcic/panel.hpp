#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "otcic/point_cloud.hpp"

namespace otcic {

enum class Group { control, treated };
enum class Period { pre, post };

struct PanelRecord {
  std::string unit_id;
  Group group = Group::control;
  Period period = Period::pre;
  std::vector<double> outcome;
  std::string pair_id;  // empty when the unit is not linked across periods
};

// Two-group, two-period panel. Validation requires a consistent outcome
// dimension and, when pair ids are used, that each id links at most one pre
// and one post record within the same group.
class PanelDataset {
 public:
  explicit PanelDataset(std::vector<PanelRecord> records);

  std::size_t dim() const { return dim_; }
  const std::vector<PanelRecord>& records() const { return records_; }

  // Record indices of one cell, in input order.
  const std::vector<std::size_t>& cell_indices(Group g, Period p) const;
  std::size_t cell_size(Group g, Period p) const { return cell_indices(g, p).size(); }

  // Uniformly weighted cloud of one cell's outcomes. Throws
  // std::invalid_argument naming the cell if it is empty.
  PointCloud cell(Group g, Period p) const;

  // True when every treated pre record is linked to exactly one treated post
  // record and vice versa.
  bool treated_fully_paired() const;

  // Pairs of record indices (pre, post) for linked treated units, ordered by
  // the pre record's position within the treated-pre cell.
  std::vector<std::pair<std::size_t, std::size_t>> treated_pairs() const;

 private:
  std::vector<PanelRecord> records_;
  std::vector<std::size_t> cells_[2][2];
  std::size_t dim_ = 0;
};

const char* to_string(Group g);
const char* to_string(Period p);

}  // namespace otcic
