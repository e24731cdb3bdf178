#include "otcic/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "otcic/kahan.hpp"
#include "otcic/kernels.hpp"
#include "otcic/network_simplex.hpp"

namespace otcic {

namespace {

void require_same_dim(const PointCloud& a, const PointCloud& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("point clouds have different dimensions");
}

// Indices of positive-weight points, in input order.
std::vector<std::uint32_t> positive_indices(const PointCloud& cloud) {
  std::vector<std::uint32_t> kept;
  kept.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (cloud.weight(i) > 0.0) kept.push_back(static_cast<std::uint32_t>(i));
  return kept;
}

void check_marginals(const TransportPlan& plan, std::uint64_t pivots) {
  const std::vector<double> rows = plan.row_sums();
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (std::abs(rows[i] - plan.source().weight(i)) > kMarginalTol)
      throw TransportError("solver produced an infeasible source marginal", pivots);
  const std::vector<double> cols = plan.col_sums();
  for (std::size_t j = 0; j < cols.size(); ++j)
    if (std::abs(cols[j] - plan.target().weight(j)) > kMarginalTol)
      throw TransportError("solver produced an infeasible target marginal", pivots);
}

}  // namespace

std::vector<double> cost_matrix(const PointCloud& a, const PointCloud& b) {
  require_same_dim(a, b);
  const std::vector<double> bt = kernels::transpose(b.data().data(), b.size(), b.dim());
  std::vector<double> out(a.size() * b.size());
  kernels::sqdist_matrix(a.data().data(), a.size(), bt.data(), b.size(), a.dim(),
                         out.data());
  return out;
}

TransportPlan solve_ot(const PointCloud& a, const PointCloud& b,
                       std::uint64_t max_pivots) {
  require_same_dim(a, b);

  const std::vector<std::uint32_t> src_kept = positive_indices(a);
  const std::vector<std::uint32_t> tgt_kept = positive_indices(b);
  if (src_kept.empty() || tgt_kept.empty())
    throw std::invalid_argument("optimal transport needs positive mass on both sides");

  const bool all_positive =
      src_kept.size() == a.size() && tgt_kept.size() == b.size();

  std::vector<double> costs;
  std::vector<double> supply, demand;
  const std::size_t d = a.dim();
  std::size_t n = a.size(), m = b.size();

  if (all_positive) {
    costs = cost_matrix(a, b);
    supply.assign(a.weights().begin(), a.weights().end());
    demand.assign(b.weights().begin(), b.weights().end());
  } else {
    n = src_kept.size();
    m = tgt_kept.size();
    std::vector<double> sdata(n * d), tdata(m * d);
    supply.resize(n);
    demand.resize(m);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = a.point(src_kept[i]);
      std::copy(p.begin(), p.end(), sdata.begin() + i * d);
      supply[i] = a.weight(src_kept[i]);
    }
    for (std::size_t j = 0; j < m; ++j) {
      const auto p = b.point(tgt_kept[j]);
      std::copy(p.begin(), p.end(), tdata.begin() + j * d);
      demand[j] = b.weight(tgt_kept[j]);
    }
    const std::vector<double> tt = kernels::transpose(tdata.data(), m, d);
    costs.resize(n * m);
    kernels::sqdist_matrix(sdata.data(), n, tt.data(), m, d, costs.data());
  }

  TransportationSolution sol =
      solve_transportation(supply, demand, costs.data(), n, m, max_pivots);

  if (!all_positive) {
    for (PlanEntry& e : sol.entries) {
      e.source = src_kept[e.source];
      e.target = tgt_kept[e.target];
    }
  }

  TransportPlan plan(a, b, std::move(sol.entries), sol.cost);
  check_marginals(plan, sol.pivots);
  return plan;
}

TransportPlan solve_ot_1d(const PointCloud& a, const PointCloud& b) {
  require_same_dim(a, b);
  if (a.dim() != 1)
    throw std::invalid_argument("solve_ot_1d requires one-dimensional clouds");

  std::vector<std::uint32_t> sa = positive_indices(a);
  std::vector<std::uint32_t> sb = positive_indices(b);
  if (sa.empty() || sb.empty())
    throw std::invalid_argument("optimal transport needs positive mass on both sides");
  std::stable_sort(sa.begin(), sa.end(), [&](std::uint32_t l, std::uint32_t r) {
    return a.coord(l, 0) < a.coord(r, 0);
  });
  std::stable_sort(sb.begin(), sb.end(), [&](std::uint32_t l, std::uint32_t r) {
    return b.coord(l, 0) < b.coord(r, 0);
  });

  // Sweep both sorted supports, always exhausting the smaller remainder; this
  // is the monotone (north-west corner) coupling of the two quantile scales.
  std::vector<PlanEntry> entries;
  entries.reserve(sa.size() + sb.size());
  Kahan cost;
  std::size_t i = 0, j = 0;
  double ra = a.weight(sa[0]), rb = b.weight(sb[0]);
  while (true) {
    const double f = std::max(0.0, std::min(ra, rb));
    if (f > 0.0) {
      const double diff = a.coord(sa[i], 0) - b.coord(sb[j], 0);
      entries.push_back({sa[i], sb[j], f});
      cost.add(f * (diff * diff));
    }
    ra -= f;
    rb -= f;
    if (i == sa.size() - 1 && j == sb.size() - 1) break;
    if (ra <= rb && i < sa.size() - 1)
      ra = a.weight(sa[++i]);
    else if (j < sb.size() - 1)
      rb = b.weight(sb[++j]);
    else
      ra = a.weight(sa[++i]);
  }

  std::sort(entries.begin(), entries.end(), [](const PlanEntry& l, const PlanEntry& r) {
    return l.source != r.source ? l.source < r.source : l.target < r.target;
  });
  TransportPlan plan(a, b, std::move(entries), cost.sum);
  check_marginals(plan, 0);
  return plan;
}

TransportPlan brute_force_ot(const PointCloud& a, const PointCloud& b) {
  require_same_dim(a, b);
  if (a.size() != b.size())
    throw std::invalid_argument("brute force oracle needs equal-size clouds");
  const std::size_t n = a.size();
  if (n > 10)
    throw std::invalid_argument("brute force oracle is limited to n <= 10");
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(a.weight(i) - w) > 1e-12 || std::abs(b.weight(i) - w) > 1e-12)
      throw std::invalid_argument("brute force oracle needs uniform weights");
  }

  const std::vector<double> costs = cost_matrix(a, b);
  std::vector<std::uint32_t> perm(n), best_perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  best_perm = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    Kahan acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(w * costs[i * n + perm[i]]);
    if (acc.sum < best_cost) {
      best_cost = acc.sum;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<PlanEntry> entries(n);
  for (std::size_t i = 0; i < n; ++i)
    entries[i] = {static_cast<std::uint32_t>(i), best_perm[i], w};
  return TransportPlan(a, b, std::move(entries), best_cost);
}

std::vector<std::uint32_t> nearest_neighbors(const PointCloud& queries,
                                             const PointCloud& refs) {
  require_same_dim(queries, refs);
  const std::size_t nq = queries.size(), nr = refs.size(), d = refs.dim();
  const std::vector<double> rt = kernels::transpose(refs.data().data(), nr, d);
  std::vector<std::uint32_t> out(nq);
  std::vector<double> row(nr);
  for (std::size_t i = 0; i < nq; ++i) {
    kernels::sqdist_matrix(queries.data().data() + i * d, 1, rt.data(), nr, d,
                           row.data());
    std::size_t best = 0;
    for (std::size_t j = 1; j < nr; ++j)
      if (row[j] < row[best]) best = j;  // strict: ties keep the lowest index
    out[i] = static_cast<std::uint32_t>(best);
  }
  return out;
}

}  // namespace otcic
