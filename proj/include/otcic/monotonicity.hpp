#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "otcic/point_cloud.hpp"

namespace otcic {

// Pairwise monotonicity violation: <u_i - u_j, T(u_i) - T(u_j)> < -tol.
struct PairViolation {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  double inner = 0.0;
};

struct MonotonicityReport {
  double min_inner = 0.0;  // smallest inner product over all checked pairs
  std::vector<PairViolation> violations;
  std::size_t pairs_checked = 0;
  bool ok() const { return violations.empty(); }
};

// Cycle slack: sum_i ||u_i - T(u_{i+1})||^2 - sum_i ||u_i - T(u_i)||^2 over a
// cyclic index sequence. Negative slack beyond tolerance means the aligned
// assignment is beaten by the cyclic shift, i.e. the map cannot be the
// gradient of a convex function.
struct CycleViolation {
  std::vector<std::uint32_t> cycle;
  double slack = 0.0;
};

struct CyclicalReport {
  double min_slack = 0.0;
  CycleViolation worst;  // cycle achieving min_slack
  std::vector<CycleViolation> violations;
  std::size_t cycles_checked = 0;
  bool sampled = false;             // true when the cycle budget forced random sampling
  bool violations_overflowed = false;  // more violations existed than were stored
  bool ok() const { return violations.empty() && !violations_overflowed; }
};

struct CyclicalOptions {
  double tol = 1e-10;
  std::size_t exhaustive_point_limit = 12;
  std::uint64_t enumeration_budget = 5000000;  // cycles, before sampling kicks in
  std::uint64_t sample_count = 10000;
  std::uint64_t seed = 1;
  std::size_t violation_cap = 1000;  // stored violations; the count keeps growing
};

// Checks <u_i - u_j, T(u_i) - T(u_j)> >= -tol over all pairs. `points` holds
// the u_i and `images` the T(u_i), same length and dimension.
MonotonicityReport check_monotone(const PointCloud& points, const PointCloud& images,
                                  double tol = 1e-10);

// Checks the cycle inequality for all cycle lengths 2..max_cycle_len. Up to
// exhaustive_point_limit points (and within the enumeration budget) every
// cycle is enumerated; beyond that, sample_count seeded random cycles are
// drawn and the report is flagged "sampled". Length-2 cycles are evaluated
// through the pairwise inner product (the slack is exactly twice it), so the
// max_cycle_len = 2 verdict coincides with check_monotone.
CyclicalReport check_cyclical_monotone(const PointCloud& points, const PointCloud& images,
                                       std::size_t max_cycle_len,
                                       const CyclicalOptions& options = {});

}  // namespace otcic
