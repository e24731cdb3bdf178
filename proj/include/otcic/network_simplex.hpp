#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "otcic/transport.hpp"

namespace otcic {

struct TransportationSolution {
  std::vector<PlanEntry> entries;  // positive flows, sorted by (source, target)
  double cost = 0.0;               // compensated sum of flow * cost
  std::uint64_t pivots = 0;
};

// Network simplex for the dense transportation problem
//
//   min sum_ij c[i*m + j] x_ij   s.t.  sum_j x_ij = supply_i,
//                                      sum_i x_ij = demand_j,  x >= 0.
//
// Supplies and demands must be strictly positive with equal totals (the
// largest demand absorbs any rounding residual before solving). The basis is
// initialised by the north-west corner rule; pivoting uses block pricing with
// the most negative reduced cost per block and leaves via the last blocking
// arc on the cycle, keeping the run deterministic for fixed inputs. Vertex
// solutions mean the support has at most n + m - 1 entries, so uniform
// equal-size inputs yield permutation plans.
//
// Throws TransportError with the pivot count if max_pivots is exceeded
// (max_pivots = 0 picks a generous default).
TransportationSolution solve_transportation(std::span<const double> supply,
                                            std::span<const double> demand,
                                            const double* cost, std::size_t n,
                                            std::size_t m,
                                            std::uint64_t max_pivots = 0);

}  // namespace otcic
