#include "otcic/transport.hpp"

#include <algorithm>
#include <cmath>

#include "otcic/kahan.hpp"

namespace otcic {

namespace {

double sqdist(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    acc = acc + diff * diff;
  }
  return acc;
}

}  // namespace

TransportPlan::TransportPlan(PointCloud source, PointCloud target,
                             std::vector<PlanEntry> entries, double cost)
    : source_(std::move(source)),
      target_(std::move(target)),
      entries_(std::move(entries)),
      cost_(cost) {
  for (const PlanEntry& e : entries_) {
    if (e.source >= source_.size() || e.target >= target_.size())
      throw std::invalid_argument("plan entry indexes outside the clouds");
  }
}

std::vector<double> TransportPlan::row_sums() const {
  std::vector<double> sums(source_.size(), 0.0);
  for (const PlanEntry& e : entries_) sums[e.source] += e.mass;
  return sums;
}

std::vector<double> TransportPlan::col_sums() const {
  std::vector<double> sums(target_.size(), 0.0);
  for (const PlanEntry& e : entries_) sums[e.target] += e.mass;
  return sums;
}

std::vector<double> TransportPlan::dense() const {
  std::vector<double> mat(source_.size() * target_.size(), 0.0);
  for (const PlanEntry& e : entries_) mat[e.source * target_.size() + e.target] += e.mass;
  return mat;
}

const char* to_string(Rounding r) {
  return r == Rounding::mode ? "mode" : "barycentric";
}

double TransportPlan::recompute_cost() const {
  Kahan acc;
  for (const PlanEntry& e : entries_)
    acc.add(e.mass * sqdist(source_.point(e.source), target_.point(e.target)));
  return acc.sum;
}

void TransportPlan::validate() const {
  for (const PlanEntry& e : entries_) {
    if (!(e.mass >= 0.0))
      throw TransportError("transport plan carries negative mass", 0);
  }
  const std::vector<double> rows = row_sums();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (std::abs(rows[i] - source_.weight(i)) > kMarginalTol)
      throw TransportError("source marginal violated at index " + std::to_string(i), 0);
  }
  const std::vector<double> cols = col_sums();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (std::abs(cols[j] - target_.weight(j)) > kMarginalTol)
      throw TransportError("target marginal violated at index " + std::to_string(j), 0);
  }
  if (std::abs(recompute_cost() - cost_) > kMarginalTol * (1.0 + std::abs(cost_)))
    throw TransportError("stored transport cost disagrees with the entries", 0);
}

TransportMap::TransportMap(PointCloud source, PointCloud target, Rounding rounding,
                           std::vector<std::uint32_t> assignment,
                           std::vector<double> images)
    : source_(std::move(source)),
      target_(std::move(target)),
      rounding_(rounding),
      assignment_(std::move(assignment)),
      images_(std::move(images)) {}

std::span<const double> TransportMap::image(std::size_t i) const {
  if (rounding_ == Rounding::mode) return target_.point(assignment_[i]);
  return {images_.data() + i * target_.dim(), target_.dim()};
}

TransportMap round_to_map(const TransportPlan& plan, Rounding rounding) {
  const PointCloud& src = plan.source();
  const PointCloud& tgt = plan.target();
  const std::size_t n = src.size();
  const std::size_t d = tgt.dim();
  const auto& entries = plan.entries();

  std::vector<std::uint32_t> assignment;
  std::vector<double> images;

  // Entries are sorted by source, so each row is one contiguous run.
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t begin = pos;
    while (pos < entries.size() && entries[pos].source == i) ++pos;
    if (pos == begin)
      throw std::logic_error("transport plan has an empty source row at index " +
                             std::to_string(i));

    if (rounding == Rounding::mode) {
      std::size_t best = begin;
      double best_cost = sqdist(src.point(i), tgt.point(entries[begin].target));
      for (std::size_t e = begin + 1; e < pos; ++e) {
        const double cost = sqdist(src.point(i), tgt.point(entries[e].target));
        const bool better =
            entries[e].mass > entries[best].mass ||
            (entries[e].mass == entries[best].mass && cost < best_cost);
        // equal mass and cost keeps the earlier entry, i.e. the smaller index
        if (better) {
          best = e;
          best_cost = cost;
        }
      }
      assignment.push_back(entries[best].target);
    } else {
      double row_mass = 0.0;
      for (std::size_t e = begin; e < pos; ++e) row_mass += entries[e].mass;
      std::vector<double> mean(d, 0.0);
      for (std::size_t e = begin; e < pos; ++e) {
        const auto y = tgt.point(entries[e].target);
        const double w = entries[e].mass / row_mass;
        for (std::size_t k = 0; k < d; ++k) mean[k] += w * y[k];
      }
      images.insert(images.end(), mean.begin(), mean.end());
    }
  }

  return TransportMap(src, tgt, rounding, std::move(assignment), std::move(images));
}

}  // namespace otcic
