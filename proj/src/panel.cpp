#include "otcic/panel.hpp"

#include <map>
#include <stdexcept>

namespace otcic {

namespace {

std::string cell_name(Group g, Period p) {
  return std::string(to_string(g)) + "/" + to_string(p);
}

}  // namespace

const char* to_string(Group g) { return g == Group::control ? "control" : "treated"; }
const char* to_string(Period p) { return p == Period::pre ? "pre" : "post"; }

PanelDataset::PanelDataset(std::vector<PanelRecord> records)
    : records_(std::move(records)) {
  if (records_.empty()) throw std::invalid_argument("panel has no records");
  dim_ = records_.front().outcome.size();
  if (dim_ == 0) throw std::invalid_argument("panel outcomes must be nonempty vectors");

  // pair_id -> count per (group, period); each id may link one pre and one
  // post record of the same group
  std::map<std::pair<std::string, int>, std::pair<int, int>> pair_use;
  for (std::size_t r = 0; r < records_.size(); ++r) {
    const PanelRecord& rec = records_[r];
    if (rec.outcome.size() != dim_)
      throw std::invalid_argument("panel outcomes must share one dimension");
    cells_[static_cast<int>(rec.group)][static_cast<int>(rec.period)].push_back(r);
    if (!rec.pair_id.empty()) {
      auto& use = pair_use[{rec.pair_id, static_cast<int>(rec.group)}];
      int& slot = rec.period == Period::pre ? use.first : use.second;
      if (++slot > 1)
        throw std::invalid_argument("pair id '" + rec.pair_id +
                                    "' links more than one " +
                                    cell_name(rec.group, rec.period) + " record");
    }
  }
}

const std::vector<std::size_t>& PanelDataset::cell_indices(Group g, Period p) const {
  return cells_[static_cast<int>(g)][static_cast<int>(p)];
}

PointCloud PanelDataset::cell(Group g, Period p) const {
  const std::vector<std::size_t>& idx = cell_indices(g, p);
  if (idx.empty())
    throw std::invalid_argument("panel cell " + cell_name(g, p) + " is empty");
  std::vector<double> flat;
  flat.reserve(idx.size() * dim_);
  for (std::size_t r : idx)
    flat.insert(flat.end(), records_[r].outcome.begin(), records_[r].outcome.end());
  return PointCloud(std::move(flat), dim_);
}

bool PanelDataset::treated_fully_paired() const {
  const auto& pre = cell_indices(Group::treated, Period::pre);
  const auto& post = cell_indices(Group::treated, Period::post);
  if (pre.empty() || pre.size() != post.size()) return false;
  return treated_pairs().size() == pre.size();
}

std::vector<std::pair<std::size_t, std::size_t>> PanelDataset::treated_pairs() const {
  std::map<std::string, std::size_t> post_by_pair;
  for (std::size_t r : cell_indices(Group::treated, Period::post))
    if (!records_[r].pair_id.empty()) post_by_pair[records_[r].pair_id] = r;

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t r : cell_indices(Group::treated, Period::pre)) {
    const std::string& pid = records_[r].pair_id;
    if (pid.empty()) continue;
    const auto hit = post_by_pair.find(pid);
    if (hit != post_by_pair.end()) pairs.emplace_back(r, hit->second);
  }
  return pairs;
}

}  // namespace otcic
