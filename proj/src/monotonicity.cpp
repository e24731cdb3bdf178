#include "otcic/monotonicity.hpp"

#include <algorithm>
#include <stdexcept>

#include "otcic/rng.hpp"

namespace otcic {

namespace {

void require_paired(const PointCloud& points, const PointCloud& images) {
  if (points.size() != images.size())
    throw std::invalid_argument("points and images must have equal counts");
  if (points.dim() != images.dim())
    throw std::invalid_argument("points and images must share a dimension");
}

double inner_diff(const PointCloud& u, const PointCloud& tu, std::size_t i,
                  std::size_t j) {
  const auto ui = u.point(i), uj = u.point(j);
  const auto ti = tu.point(i), tj = tu.point(j);
  double acc = 0.0;
  for (std::size_t k = 0; k < u.dim(); ++k)
    acc += (ui[k] - uj[k]) * (ti[k] - tj[k]);
  return acc;
}

double sqdist_at(const PointCloud& u, std::size_t i, const PointCloud& tu,
                 std::size_t j) {
  const auto a = u.point(i), b = tu.point(j);
  double acc = 0.0;
  for (std::size_t k = 0; k < u.dim(); ++k) {
    const double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return acc;
}

// Slack of one cycle; length-2 cycles go through the inner product so the
// verdict matches check_monotone exactly.
double cycle_slack(const PointCloud& u, const PointCloud& tu,
                   const std::vector<std::uint32_t>& cycle) {
  const std::size_t m = cycle.size();
  if (m == 2) return 2.0 * inner_diff(u, tu, cycle[0], cycle[1]);
  double aligned = 0.0, shifted = 0.0;
  for (std::size_t t = 0; t < m; ++t) {
    const std::uint32_t i = cycle[t];
    const std::uint32_t next = cycle[(t + 1) % m];
    aligned += sqdist_at(u, i, tu, i);
    shifted += sqdist_at(u, i, tu, next);
  }
  return shifted - aligned;
}

bool cycle_violates(const std::vector<std::uint32_t>& cycle, double slack, double tol) {
  if (cycle.size() == 2) return 0.5 * slack < -tol;  // inner product scale
  return slack < -tol;
}

// Number of cycles of lengths 2..max_len over k points: sum_m C(k,m)*(m-1)!,
// saturating at `cap` to keep the estimate cheap.
std::uint64_t count_cycles(std::size_t k, std::size_t max_len, std::uint64_t cap) {
  long double total = 0.0L;
  for (std::size_t m = 2; m <= max_len && m <= k; ++m) {
    long double c = 1.0L;
    for (std::size_t t = 0; t < m; ++t) c = c * static_cast<long double>(k - t) / (t + 1);
    for (std::size_t t = 2; t < m; ++t) c *= static_cast<long double>(t);
    total += c;
    if (total > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::uint64_t>(total);
}

struct Collector {
  const PointCloud& u;
  const PointCloud& tu;
  const CyclicalOptions& opt;
  CyclicalReport report;

  void consider(const std::vector<std::uint32_t>& cycle) {
    const double slack = cycle_slack(u, tu, cycle);
    if (report.cycles_checked == 0 || slack < report.min_slack) {
      report.min_slack = slack;
      report.worst = {cycle, slack};
    }
    ++report.cycles_checked;
    if (cycle_violates(cycle, slack, opt.tol)) {
      if (report.violations.size() < opt.violation_cap)
        report.violations.push_back({cycle, slack});
      else
        report.violations_overflowed = true;
    }
  }
};

// Enumerates all cycles of length m over the points: combinations with the
// smallest member first (canonical rotation), then all orders of the rest.
void enumerate_cycles(Collector& col, std::size_t k, std::size_t m) {
  std::vector<std::uint32_t> combo(m);
  // combination indices c_0 < c_1 < ... < c_{m-1}
  for (std::size_t t = 0; t < m; ++t) combo[t] = static_cast<std::uint32_t>(t);
  while (true) {
    std::vector<std::uint32_t> rest(combo.begin() + 1, combo.end());
    std::sort(rest.begin(), rest.end());
    do {
      std::vector<std::uint32_t> cycle;
      cycle.reserve(m);
      cycle.push_back(combo[0]);
      cycle.insert(cycle.end(), rest.begin(), rest.end());
      col.consider(cycle);
    } while (std::next_permutation(rest.begin(), rest.end()));

    // next combination
    std::size_t t = m;
    while (t > 0) {
      --t;
      if (combo[t] + (m - t) < k) {
        ++combo[t];
        for (std::size_t s = t + 1; s < m; ++s) combo[s] = combo[s - 1] + 1;
        break;
      }
      if (t == 0) return;
    }
  }
}

}  // namespace

MonotonicityReport check_monotone(const PointCloud& points, const PointCloud& images,
                                  double tol) {
  require_paired(points, images);
  MonotonicityReport report;
  const std::size_t k = points.size();
  bool first = true;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double inner = inner_diff(points, images, i, j);
      if (first || inner < report.min_inner) {
        report.min_inner = inner;
        first = false;
      }
      ++report.pairs_checked;
      if (inner < -tol)
        report.violations.push_back(
            {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), inner});
    }
  }
  return report;
}

CyclicalReport check_cyclical_monotone(const PointCloud& points, const PointCloud& images,
                                       std::size_t max_cycle_len,
                                       const CyclicalOptions& options) {
  require_paired(points, images);
  if (max_cycle_len < 2)
    throw std::invalid_argument("cycles need length at least 2");
  const std::size_t k = points.size();

  Collector col{points, images, options, {}};
  if (k < 2) return col.report;
  const std::uint64_t cycles =
      count_cycles(k, max_cycle_len, options.enumeration_budget);
  const bool exhaustive = k <= options.exhaustive_point_limit &&
                          cycles <= options.enumeration_budget;

  if (exhaustive) {
    for (std::size_t m = 2; m <= max_cycle_len && m <= k; ++m)
      enumerate_cycles(col, k, m);
  } else {
    col.report.sampled = true;
    Rng rng(options.seed);
    const std::size_t max_m = std::min(max_cycle_len, k);
    std::vector<std::uint32_t> cycle;
    for (std::uint64_t s = 0; s < options.sample_count; ++s) {
      const std::size_t m = 2 + rng.uniform_index(max_m - 1);
      cycle = rng.sample_without_replacement(static_cast<std::uint32_t>(k),
                                             static_cast<std::uint32_t>(m));
      col.consider(cycle);
    }
  }
  return col.report;
}

}  // namespace otcic
