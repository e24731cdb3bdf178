#include "otcic/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "otcic/kahan.hpp"

namespace otcic {

namespace {

// Rooted spanning-tree representation of a transportation basis. Nodes
// 0..n-1 are sources, n..n+m-1 are sinks; node 0 is the root. Each non-root
// node stores the flow on the arc to its parent, so only basic arcs carry
// flow at all.
class Solver {
 public:
  Solver(std::span<const double> supply, std::span<const double> demand,
         const double* cost, std::uint64_t max_pivots)
      : n_(supply.size()),
        m_(demand.size()),
        c_(cost),
        supply_(supply.begin(), supply.end()),
        demand_(demand.begin(), demand.end()),
        max_pivots_(max_pivots) {
    const std::size_t nodes = n_ + m_;
    parent_.assign(nodes, -1);
    flow_up_.assign(nodes, 0.0);
    pi_.assign(nodes, 0.0);
    depth_.assign(nodes, 0);
    kid_pos_.assign(nodes, 0);
    kids_.assign(nodes, {});

    double total = 0.0;
    double cmax = 0.0;
    for (double s : supply_) total += s;
    total_supply_ = total;
    for (std::size_t a = 0; a < n_ * m_; ++a) {
      if (!std::isfinite(c_[a]))
        throw std::invalid_argument("transportation costs must be finite");
      cmax = std::max(cmax, std::abs(c_[a]));
    }
    eps_ = 1e-12 * std::max(1.0, cmax);

    const std::size_t block = std::max<std::size_t>(
        1024, static_cast<std::size_t>(std::sqrt(static_cast<double>(n_ * m_))));
    chunk_rows_ = std::max<std::size_t>(1, (block + m_ - 1) / m_);
  }

  TransportationSolution run() {
    init_northwest();
    std::size_t bi = 0, bj = 0;
    while (price(bi, bj)) {
      if (++pivots_ > max_pivots_)
        throw TransportError("network simplex exceeded the pivot limit after " +
                                 std::to_string(pivots_) + " pivots",
                             pivots_);
      pivot(bi, bj);
    }
    return extract();
  }

 private:
  void attach(std::int32_t v, std::int32_t p, double f) {
    parent_[v] = p;
    flow_up_[v] = f;
    depth_[v] = depth_[p] + 1;
    kid_pos_[v] = static_cast<std::int32_t>(kids_[p].size());
    kids_[p].push_back(v);
  }

  void detach(std::int32_t v) {
    auto& sibs = kids_[parent_[v]];
    const std::int32_t pos = kid_pos_[v];
    sibs[pos] = sibs.back();
    kid_pos_[sibs[pos]] = pos;
    sibs.pop_back();
  }

  double arc_cost(std::int32_t child, std::int32_t par) const {
    return child < static_cast<std::int32_t>(n_)
               ? c_[static_cast<std::size_t>(child) * m_ + (par - n_)]
               : c_[static_cast<std::size_t>(par) * m_ + (child - n_)];
  }

  // North-west corner rule. Visiting cells left to right, top to bottom,
  // each allocation introduces exactly one new node, so the basic cells form
  // a path: a spanning tree with n + m - 1 arcs, degenerate zeros included.
  void init_northwest() {
    std::size_t i = 0, j = 0;
    double a = supply_[0], b = demand_[0];
    bool new_is_source = false;  // the first cell introduces sink 0
    while (true) {
      const double f = std::max(0.0, std::min(a, b));
      const auto src = static_cast<std::int32_t>(i);
      const auto snk = static_cast<std::int32_t>(n_ + j);
      if (new_is_source)
        attach(src, snk, f);
      else
        attach(snk, src, f);
      a -= f;
      b -= f;
      if (i == n_ - 1 && j == m_ - 1) break;
      if (a <= b && i < n_ - 1) {
        ++i;
        a = supply_[i];
        new_is_source = true;
      } else {
        ++j;
        b = demand_[j];
        new_is_source = false;
      }
    }

    pi_[0] = 0.0;
    stack_.assign(1, 0);
    while (!stack_.empty()) {
      const std::int32_t v = stack_.back();
      stack_.pop_back();
      for (std::int32_t w : kids_[v]) {
        pi_[w] = arc_cost(w, v) - pi_[v];
        stack_.push_back(w);
      }
    }
  }

  // Block pricing over whole cost rows: scan chunk_rows_ rows from a rotating
  // cursor and pivot on the most negative reduced cost seen so far; a full
  // sweep without a candidate proves optimality.
  bool price(std::size_t& bi, std::size_t& bj) {
    double best = -eps_;
    bool found = false;
    std::size_t scanned = 0;
    while (scanned < n_) {
      for (std::size_t r = 0; r < chunk_rows_ && scanned < n_; ++r, ++scanned) {
        const std::size_t i = next_row_;
        next_row_ = next_row_ + 1 == n_ ? 0 : next_row_ + 1;
        const double ui = pi_[i];
        const double* ci = c_ + i * m_;
        const double* vj = pi_.data() + n_;
        for (std::size_t j = 0; j < m_; ++j) {
          const double rc = ci[j] - ui - vj[j];
          if (rc < best) {
            best = rc;
            bi = i;
            bj = j;
            found = true;
          }
        }
      }
      if (found) return true;
    }
    return false;
  }

  void pivot(std::size_t bi, std::size_t bj) {
    const auto ei = static_cast<std::int32_t>(bi);
    const auto ejn = static_cast<std::int32_t>(n_ + bj);
    const double r = c_[bi * m_ + bj] - pi_[ei] - pi_[ejn];

    // Walk both endpoints to their common apex, recording traversed nodes.
    up_i_.clear();
    up_j_.clear();
    std::int32_t x = ei, y = ejn;
    while (depth_[x] > depth_[y]) {
      up_i_.push_back(x);
      x = parent_[x];
    }
    while (depth_[y] > depth_[x]) {
      up_j_.push_back(y);
      y = parent_[y];
    }
    while (x != y) {
      up_i_.push_back(x);
      x = parent_[x];
      up_j_.push_back(y);
      y = parent_[y];
    }

    // Pushing mass along the entering arc drains, on the ei side, the arcs
    // stored at source nodes and, on the ej side, the arcs stored at sinks.
    const auto limit = std::numeric_limits<double>::infinity();
    double theta = limit;
    for (std::int32_t v : up_i_)
      if (v < static_cast<std::int32_t>(n_)) theta = std::min(theta, flow_up_[v]);
    for (std::int32_t v : up_j_)
      if (v >= static_cast<std::int32_t>(n_)) theta = std::min(theta, flow_up_[v]);

    // Leaving arc: the last blocking arc along the cycle traversed from the
    // apex in the entering arc's direction (apex -> ei -> ejn -> apex). This
    // is the classic strongly-feasible-basis rule, which wards off cycling
    // through degenerate pivots.
    std::int32_t lv = -1;
    bool lv_on_i_side = false;
    for (auto it = up_i_.rbegin(); it != up_i_.rend(); ++it)
      if (*it < static_cast<std::int32_t>(n_) && flow_up_[*it] == theta) {
        lv = *it;
        lv_on_i_side = true;
      }
    for (std::int32_t v : up_j_)
      if (v >= static_cast<std::int32_t>(n_) && flow_up_[v] == theta) {
        lv = v;
        lv_on_i_side = false;
      }

    for (std::int32_t v : up_i_)
      flow_up_[v] += v < static_cast<std::int32_t>(n_) ? -theta : theta;
    for (std::int32_t v : up_j_)
      flow_up_[v] += v >= static_cast<std::int32_t>(n_) ? -theta : theta;

    // Cut below the leaving arc, re-root that subtree at the entering
    // endpoint it contains, and hang it from the other endpoint. Walking the
    // path q -> lv, each arc flips direction and its flow record moves to the
    // new child side.
    const std::int32_t q = lv_on_i_side ? ei : ejn;
    const std::int32_t other = lv_on_i_side ? ejn : ei;
    std::int32_t v = q, prev = other;
    double carry = theta;  // flow on the entering arc
    while (true) {
      const std::int32_t old_parent = parent_[v];
      const double old_flow = flow_up_[v];
      detach(v);
      parent_[v] = prev;
      flow_up_[v] = carry;
      kid_pos_[v] = static_cast<std::int32_t>(kids_[prev].size());
      kids_[prev].push_back(v);
      if (v == lv) break;
      prev = v;
      v = old_parent;
      carry = old_flow;
    }

    // Potentials inside the moved subtree shift by the entering reduced cost,
    // one sign per bipartite side; everything else keeps its dual value.
    const double src_shift = q == ei ? r : -r;
    stack_.assign(1, q);
    while (!stack_.empty()) {
      const std::int32_t w = stack_.back();
      stack_.pop_back();
      depth_[w] = depth_[parent_[w]] + 1;
      pi_[w] += w < static_cast<std::int32_t>(n_) ? src_shift : -src_shift;
      for (std::int32_t k : kids_[w]) stack_.push_back(k);
    }
  }

  TransportationSolution extract() const {
    TransportationSolution out;
    const double emit_tol = 1e-15 * total_supply_;
    out.entries.reserve(n_ + m_);
    for (std::size_t v = 1; v < n_ + m_; ++v) {
      const double f = flow_up_[v];
      if (!(f > emit_tol)) continue;
      const std::int32_t p = parent_[static_cast<std::int32_t>(v)];
      PlanEntry e;
      if (v < n_) {
        e.source = static_cast<std::uint32_t>(v);
        e.target = static_cast<std::uint32_t>(p - static_cast<std::int32_t>(n_));
      } else {
        e.source = static_cast<std::uint32_t>(p);
        e.target = static_cast<std::uint32_t>(v - n_);
      }
      e.mass = f;
      out.entries.push_back(e);
    }
    std::sort(out.entries.begin(), out.entries.end(),
              [](const PlanEntry& a, const PlanEntry& b) {
                return a.source != b.source ? a.source < b.source : a.target < b.target;
              });
    Kahan cost;
    for (const PlanEntry& e : out.entries)
      cost.add(e.mass * c_[static_cast<std::size_t>(e.source) * m_ + e.target]);
    out.cost = cost.sum;
    out.pivots = pivots_;
    return out;
  }

  std::size_t n_;
  std::size_t m_;
  const double* c_;
  std::vector<double> supply_;
  std::vector<double> demand_;
  std::uint64_t max_pivots_;

  std::vector<std::int32_t> parent_;
  std::vector<double> flow_up_;
  std::vector<double> pi_;
  std::vector<std::int32_t> depth_;
  std::vector<std::vector<std::int32_t>> kids_;
  std::vector<std::int32_t> kid_pos_;

  std::vector<std::int32_t> stack_;
  std::vector<std::int32_t> up_i_;
  std::vector<std::int32_t> up_j_;

  double total_supply_ = 0.0;
  double eps_ = 0.0;
  std::size_t chunk_rows_ = 1;
  std::size_t next_row_ = 0;
  std::uint64_t pivots_ = 0;
};

}  // namespace

TransportationSolution solve_transportation(std::span<const double> supply,
                                            std::span<const double> demand,
                                            const double* cost, std::size_t n,
                                            std::size_t m, std::uint64_t max_pivots) {
  if (n == 0 || m == 0)
    throw std::invalid_argument("transportation problem needs nonempty marginals");
  if (supply.size() != n || demand.size() != m)
    throw std::invalid_argument("marginal sizes do not match the cost matrix shape");

  long double sa = 0.0L, sb = 0.0L;
  for (double s : supply) {
    if (!std::isfinite(s) || s < 0.0)
      throw std::invalid_argument("supplies must be finite and nonnegative");
    sa += s;
  }
  std::size_t largest = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const double dj = demand[j];
    if (!std::isfinite(dj) || dj < 0.0)
      throw std::invalid_argument("demands must be finite and nonnegative");
    sb += dj;
    if (dj > demand[largest]) largest = j;
  }
  if (sa <= 0.0L || sb <= 0.0L)
    throw std::invalid_argument("marginals must carry positive total mass");
  const double mismatch = static_cast<double>(sa - sb);
  if (std::abs(mismatch) > 1e-6 * static_cast<double>(sa))
    throw std::invalid_argument("supply and demand totals disagree");

  // Absorb the floating-point residual into the largest demand so the
  // north-west corner sweep closes exactly.
  std::vector<double> balanced(demand.begin(), demand.end());
  balanced[largest] += mismatch;
  if (balanced[largest] < 0.0)
    throw std::invalid_argument("supply and demand totals disagree");

  if (max_pivots == 0) max_pivots = 1000000ull + 1000ull * (n + m);
  Solver solver(supply, std::span<const double>(balanced), cost, max_pivots);
  return solver.run();
}

}  // namespace otcic
