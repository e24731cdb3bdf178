#include "otcic/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "otcic/estimators.hpp"
#include "otcic/kahan.hpp"
#include "otcic/kernels.hpp"
#include "otcic/parallel.hpp"

namespace otcic {

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> xs(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) xs[i] = lo + step * static_cast<double>(i);
  return xs;
}

struct Box {
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};
};

Box padded_box(std::initializer_list<const PointCloud*> clouds, double pad) {
  Box box;
  box.lo.fill(std::numeric_limits<double>::infinity());
  box.hi.fill(-std::numeric_limits<double>::infinity());
  for (const PointCloud* cloud : clouds)
    for (std::size_t i = 0; i < cloud->size(); ++i)
      for (std::size_t k = 0; k < 2; ++k) {
        const double v = cloud->coord(i, k);
        box.lo[k] = std::min(box.lo[k], v);
        box.hi[k] = std::max(box.hi[k], v);
      }
  for (std::size_t k = 0; k < 2; ++k) {
    box.lo[k] -= pad;
    box.hi[k] += pad;
  }
  return box;
}

PointCloud draw_mesh(const SyntheticConfig& config, const Box& box, Rng& rng) {
  std::vector<double> flat;
  if (config.lattice_mesh) {
    std::size_t side = 1;
    while (side * side < config.mesh_points) ++side;
    const std::vector<double> xs = linspace(box.lo[0], box.hi[0], side);
    const std::vector<double> ys = linspace(box.lo[1], box.hi[1], side);
    flat.reserve(side * side * 2);
    for (double y : ys)
      for (double x : xs) {
        flat.push_back(x);
        flat.push_back(y);
      }
  } else {
    flat.reserve(config.mesh_points * 2);
    for (std::size_t t = 0; t < config.mesh_points; ++t) {
      flat.push_back(rng.uniform(box.lo[0], box.hi[0]));
      flat.push_back(rng.uniform(box.lo[1], box.hi[1]));
    }
  }
  return PointCloud(std::move(flat), 2);
}

// Joint right-continuous eCDF of `sample` evaluated at every mesh point.
std::vector<double> joint_ecdf(const PointCloud& sample, const PointCloud& mesh) {
  if (sample.dim() != mesh.dim())
    throw std::invalid_argument("eCDF evaluation needs matching dimensions");
  const std::size_t q = mesh.size();
  const std::vector<double> st =
      kernels::transpose(sample.data().data(), sample.size(), sample.dim());
  std::vector<std::uint64_t> counts(q);
  kernels::count_dominated(st.data(), sample.size(), sample.dim(), mesh.data().data(), q,
                           counts.data());
  std::vector<double> values(q);
  const double n = static_cast<double>(sample.size());
  for (std::size_t t = 0; t < q; ++t) values[t] = static_cast<double>(counts[t]) / n;
  return values;
}

double ecdf_at(const std::vector<double>& sorted, double x) {
  const auto c = std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
  return static_cast<double>(c) / static_cast<double>(sorted.size());
}

void fill_plot_data(ExperimentReport& report, const SyntheticConfig& config,
                    const PointCloud& true_cf, const PointCloud& ot_cf,
                    const PointCloud& cic_cf, const PointCloud& mesh, const Box& box) {
  for (std::size_t k = 0; k < 2; ++k) {
    std::vector<double> st = true_cf.coordinate(k);
    std::vector<double> so = ot_cf.coordinate(k);
    std::vector<double> sc = cic_cf.coordinate(k);
    std::sort(st.begin(), st.end());
    std::sort(so.begin(), so.end());
    std::sort(sc.begin(), sc.end());
    for (double x : linspace(box.lo[k], box.hi[k], config.marginal_resolution))
      report.marginals.push_back(
          {k, x, ecdf_at(st, x), ecdf_at(so, x), ecdf_at(sc, x)});
  }

  report.kde_true = kde_grid(true_cf, config.kde_bandwidth, box.lo, box.hi,
                             config.kde_resolution);
  report.kde_ot = kde_grid(ot_cf, config.kde_bandwidth, box.lo, box.hi,
                           config.kde_resolution);
  report.kde_cic = kde_grid(cic_cf, config.kde_bandwidth, box.lo, box.hi,
                            config.kde_resolution);

  std::vector<double> ft = joint_ecdf(true_cf, mesh);
  std::vector<double> fo = joint_ecdf(ot_cf, mesh);
  std::vector<double> fc = joint_ecdf(cic_cf, mesh);
  std::sort(ft.begin(), ft.end());
  std::sort(fo.begin(), fo.end());
  std::sort(fc.begin(), fc.end());
  const double q = static_cast<double>(mesh.size());
  report.mesh_quantiles.reserve(mesh.size());
  for (std::size_t t = 0; t < mesh.size(); ++t)
    report.mesh_quantiles.push_back(
        {static_cast<double>(t + 1) / q, ft[t], fo[t], fc[t]});
}

}  // namespace

void SyntheticConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie strictly between 0 and 1");
  if (n < 2) throw std::invalid_argument("need at least two units per arm");
  if (mesh_points < 1) throw std::invalid_argument("mesh needs at least one point");
  if (runs < 1) throw std::invalid_argument("need at least one run");
  if (!(kde_bandwidth > 0.0) || !std::isfinite(kde_bandwidth))
    throw std::invalid_argument("kernel bandwidth must be positive and finite");
  if (kde_resolution < 2 || marginal_resolution < 2)
    throw std::invalid_argument("plot resolutions must be at least 2");
}

LatentSample sample_latents(const SyntheticConfig& config, Arm arm, Rng& rng) {
  config.validate();
  const auto draw = [&rng, &config](int a1, int b1, int a2, int b2) {
    std::vector<double> flat(config.n * 2);
    for (std::size_t i = 0; i < config.n; ++i) {
      flat[2 * i] = rng.beta_int(a1, b1);
      flat[2 * i + 1] = rng.beta_int(a2, b2);
    }
    return PointCloud(std::move(flat), 2);
  };
  if (arm == Arm::control) {
    PointCloud pre = draw(3, 2, 2, 3);
    PointCloud post = draw(3, 2, 2, 3);
    return LatentSample{std::move(pre), std::move(post)};
  }
  PointCloud once = draw(2, 3, 3, 2);
  PointCloud again = once;
  return LatentSample{std::move(once), std::move(again)};
}

std::array<double, 2> apply_production(std::span<const double> u, ProductionFn which,
                                       double alpha) {
  if (u.size() != 2)
    throw std::invalid_argument("production functions act on 2-D vectors");
  const double s = which == ProductionFn::h0 ? alpha : -alpha;
  return {u[0] + s * u[1], s * u[0] + u[1]};
}

PointCloud apply_production(const PointCloud& latents, ProductionFn which, double alpha) {
  if (latents.dim() != 2)
    throw std::invalid_argument("production functions act on 2-D clouds");
  std::vector<double> flat(latents.size() * 2);
  for (std::size_t i = 0; i < latents.size(); ++i) {
    const std::array<double, 2> y = apply_production(latents.point(i), which, alpha);
    flat[2 * i] = y[0];
    flat[2 * i + 1] = y[1];
  }
  std::vector<double> weights(latents.weights().begin(), latents.weights().end());
  return PointCloud(std::move(flat), 2, std::move(weights));
}

double ecdf_mad(const PointCloud& a, const PointCloud& b, const PointCloud& mesh) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("eCDF comparison needs matching dimensions");
  const std::vector<double> fa = joint_ecdf(a, mesh);
  const std::vector<double> fb = joint_ecdf(b, mesh);
  Kahan acc;
  for (std::size_t t = 0; t < fa.size(); ++t) acc.add(std::abs(fa[t] - fb[t]));
  return acc.sum / static_cast<double>(fa.size());
}

KdeGrid kde_grid(const PointCloud& sample, double bandwidth, std::array<double, 2> lo,
                 std::array<double, 2> hi, std::size_t resolution) {
  if (sample.dim() != 2) throw std::invalid_argument("density grids are 2-D");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw std::invalid_argument("kernel bandwidth must be positive and finite");
  if (resolution < 2) throw std::invalid_argument("grid resolution must be at least 2");
  if (!(lo[0] < hi[0]) || !(lo[1] < hi[1]))
    throw std::invalid_argument("grid bounds must be increasing");

  KdeGrid grid;
  grid.xs = linspace(lo[0], hi[0], resolution);
  grid.ys = linspace(lo[1], hi[1], resolution);
  grid.density.assign(resolution * resolution, 0.0);

  const std::size_t n = sample.size();
  const std::vector<double> st = kernels::transpose(sample.data().data(), n, 2);
  const double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  const double norm =
      1.0 / (static_cast<double>(n) * 2.0 * std::numbers::pi * bandwidth * bandwidth);

  // Evaluate in row chunks to bound the distance buffer.
  const std::size_t total = resolution * resolution;
  const std::size_t chunk = 256;
  std::vector<double> pts(chunk * 2);
  std::vector<double> d2(chunk * n);
  for (std::size_t start = 0; start < total; start += chunk) {
    const std::size_t count = std::min(chunk, total - start);
    for (std::size_t t = 0; t < count; ++t) {
      const std::size_t idx = start + t;
      pts[2 * t] = grid.xs[idx % resolution];
      pts[2 * t + 1] = grid.ys[idx / resolution];
    }
    kernels::sqdist_matrix(pts.data(), count, st.data(), n, 2, d2.data());
    for (std::size_t t = 0; t < count; ++t) {
      Kahan acc;
      for (std::size_t u = 0; u < n; ++u) acc.add(std::exp(-d2[t * n + u] * inv_two_h2));
      grid.density[start + t] = norm * acc.sum;
    }
  }
  return grid;
}

ExperimentReport run_experiment(const SyntheticConfig& config) {
  config.validate();
  ExperimentReport report;
  report.per_run.assign(config.runs, RunScores{});

  parallel_for(config.runs, config.threads, [&](std::size_t r) {
    const std::uint64_t run_seed = derive_seed(config.seed, r);
    Rng rng_control(derive_seed(run_seed, 0));
    Rng rng_treated(derive_seed(run_seed, 1));
    Rng rng_mesh(derive_seed(run_seed, 2));

    const LatentSample control = sample_latents(config, Arm::control, rng_control);
    const LatentSample treated = sample_latents(config, Arm::treated, rng_treated);

    const PointCloud mu0 = apply_production(control.pre, ProductionFn::h0, config.alpha);
    const PointCloud mu1 = apply_production(control.post, ProductionFn::h1, config.alpha);
    const PointCloud mu0_star =
        apply_production(treated.pre, ProductionFn::h0, config.alpha);
    const PointCloud true_cf =
        apply_production(treated.post, ProductionFn::h1, config.alpha);

    const OtCounterfactuals ot = ot_counterfactuals(mu0, mu1, mu0_star);
    const PointCloud cic_cf = cic_counterfactuals(mu0, mu1, mu0_star);

    const Box box =
        padded_box({&true_cf, &ot.counterfactuals, &cic_cf}, config.kde_bandwidth);
    const PointCloud mesh = draw_mesh(config, box, rng_mesh);

    report.per_run[r].mad_ot = ecdf_mad(true_cf, ot.counterfactuals, mesh);
    report.per_run[r].mad_cic = ecdf_mad(true_cf, cic_cf, mesh);

    if (r == 0)
      fill_plot_data(report, config, true_cf, ot.counterfactuals, cic_cf, mesh, box);
  });

  Kahan sum_ot;
  Kahan sum_cic;
  for (const RunScores& s : report.per_run) {
    sum_ot.add(s.mad_ot);
    sum_cic.add(s.mad_cic);
  }
  const double runs = static_cast<double>(config.runs);
  report.mean_mad_ot = sum_ot.sum / runs;
  report.mean_mad_cic = sum_cic.sum / runs;
  if (config.runs > 1) {
    Kahan var_ot;
    Kahan var_cic;
    for (const RunScores& s : report.per_run) {
      var_ot.add((s.mad_ot - report.mean_mad_ot) * (s.mad_ot - report.mean_mad_ot));
      var_cic.add((s.mad_cic - report.mean_mad_cic) * (s.mad_cic - report.mean_mad_cic));
    }
    report.sd_mad_ot = std::sqrt(var_ot.sum / (runs - 1.0));
    report.sd_mad_cic = std::sqrt(var_cic.sum / (runs - 1.0));
  }
  return report;
}

}  // namespace otcic
