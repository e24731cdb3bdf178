#pragma once

#include <cstdint>
#include <vector>

#include "otcic/point_cloud.hpp"
#include "otcic/transport.hpp"

namespace otcic {

// Squared Euclidean distances between every source and target point, row-major
// n x m. Throws std::invalid_argument on mismatched dimensions.
std::vector<double> cost_matrix(const PointCloud& a, const PointCloud& b);

// Exact optimal transport between two clouds under squared Euclidean cost via
// network simplex. Zero-weight points are dropped before the solve and their
// (empty) rows reinstated in the returned plan's indexing. The returned cost
// is the squared 2-Wasserstein distance between the weighted samples.
TransportPlan solve_ot(const PointCloud& a, const PointCloud& b,
                       std::uint64_t max_pivots = 0);

// One-dimensional fast path: sort both supports and sweep mass in order
// (ties broken by index). Equivalent to solve_ot on d = 1 inputs.
TransportPlan solve_ot_1d(const PointCloud& a, const PointCloud& b);

// Exhaustive oracle for uniform equal-size instances: enumerates all n!
// assignments and returns the cheapest as a plan (first in lexicographic
// order on ties). Requires n == m <= 10 and uniform weights.
TransportPlan brute_force_ot(const PointCloud& a, const PointCloud& b);

// Index of the nearest reference point for each query point (squared
// Euclidean; ties resolve to the lowest index).
std::vector<std::uint32_t> nearest_neighbors(const PointCloud& queries,
                                             const PointCloud& refs);

}  // namespace otcic
