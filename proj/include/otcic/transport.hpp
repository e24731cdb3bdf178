#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "otcic/point_cloud.hpp"

namespace otcic {

// Marginal feasibility tolerance for couplings, and the tolerance for the
// recomputed-cost consistency check.
inline constexpr double kMarginalTol = 1e-8;

struct PlanEntry {
  std::uint32_t source = 0;
  std::uint32_t target = 0;
  double mass = 0.0;
};

class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, std::uint64_t pivots)
      : std::runtime_error(what), pivots_(pivots) {}
  std::uint64_t pivots() const { return pivots_; }

 private:
  std::uint64_t pivots_ = 0;
};

// A coupling between two point clouds, stored as positive-mass triplets
// sorted by (source, target), together with its transport cost under squared
// Euclidean distance.
class TransportPlan {
 public:
  TransportPlan(PointCloud source, PointCloud target, std::vector<PlanEntry> entries,
                double cost);

  const PointCloud& source() const { return source_; }
  const PointCloud& target() const { return target_; }
  const std::vector<PlanEntry>& entries() const { return entries_; }
  double cost() const { return cost_; }

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
  // Dense n x m matrix; intended for small instances in tests.
  std::vector<double> dense() const;

  // Recomputes the transport cost from entries and squared distances with
  // compensated summation.
  double recompute_cost() const;

  // Throws TransportError if marginals deviate from the cloud weights by more
  // than kMarginalTol, if any mass is negative, or if the stored cost is
  // inconsistent with the entries.
  void validate() const;

 private:
  PointCloud source_;
  PointCloud target_;
  std::vector<PlanEntry> entries_;
  double cost_ = 0.0;
};

enum class Rounding { mode, barycentric };
const char* to_string(Rounding r);

// A deterministic map obtained by rounding a coupling. Mode rounding sends
// each source point to one target support point; barycentric rounding sends
// it to the mass-weighted mean of its targets.
class TransportMap {
 public:
  TransportMap(PointCloud source, PointCloud target, Rounding rounding,
               std::vector<std::uint32_t> assignment, std::vector<double> images);

  const PointCloud& source() const { return source_; }
  const PointCloud& target() const { return target_; }
  Rounding rounding() const { return rounding_; }

  // Target index for source i; only meaningful for mode rounding.
  std::uint32_t assignment(std::size_t i) const { return assignment_[i]; }
  const std::vector<std::uint32_t>& assignments() const { return assignment_; }

  // Image of source point i in the target space.
  std::span<const double> image(std::size_t i) const;
  std::size_t dim() const { return target_.dim(); }

 private:
  PointCloud source_;
  PointCloud target_;
  Rounding rounding_;
  std::vector<std::uint32_t> assignment_;  // mode rounding
  std::vector<double> images_;             // barycentric rounding, row-major
};

// Rounds a coupling to a map. Mode rounding picks, per source, the entry with
// the largest mass (ties: smaller squared distance, then smaller target
// index). Throws std::logic_error if some source row has no entries, which a
// feasible plan over positive weights cannot produce.
TransportMap round_to_map(const TransportPlan& plan, Rounding rounding = Rounding::mode);

}  // namespace otcic
