#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "otcic/point_cloud.hpp"
#include "otcic/rng.hpp"
#include "otcic/synthetic.hpp"

using otcic::Arm;
using otcic::PointCloud;
using otcic::ProductionFn;
using otcic::Rng;
using otcic::SyntheticConfig;

namespace {

double naive_joint_ecdf(const PointCloud& cloud, double x, double y) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.coord(i, 0) <= x && cloud.coord(i, 1) <= y) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(cloud.size());
}

PointCloud random_cloud(Rng& rng, std::size_t n) {
  std::vector<double> data(n * 2);
  for (double& v : data) v = rng.uniform();
  return PointCloud(std::move(data), 2);
}

}  // namespace

TEST_CASE("config validation rejects out-of-range fields") {
  SyntheticConfig config;
  config.validate();
  SyntheticConfig bad = config;
  bad.alpha = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = config;
  bad.alpha = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = config;
  bad.n = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = config;
  bad.kde_bandwidth = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = config;
  bad.runs = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("latent draws match their beta marginals") {
  SyntheticConfig config;
  config.n = 20000;
  Rng rng(301);
  const auto sample = otcic::sample_latents(config, Arm::control, rng);

  const auto mean = [](const PointCloud& cloud, std::size_t k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) sum += cloud.coord(i, k);
    return sum / static_cast<double>(cloud.size());
  };
  // Beta(3,2) has mean 0.6 and variance 0.04; Beta(2,3) mirrors them.
  const double se = 3.0 * std::sqrt(0.04 / static_cast<double>(config.n));
  CHECK(std::abs(mean(sample.pre, 0) - 0.6) < se);
  CHECK(std::abs(mean(sample.pre, 1) - 0.4) < se);
  CHECK(std::abs(mean(sample.post, 0) - 0.6) < se);
  CHECK(std::abs(mean(sample.post, 1) - 0.4) < se);

  bool periods_differ = false;
  for (std::size_t i = 0; i < sample.pre.size() && !periods_differ; ++i) {
    periods_differ = sample.pre.coord(i, 0) != sample.post.coord(i, 0);
  }
  CHECK(periods_differ);

  Rng treated_rng(302);
  const auto treated = otcic::sample_latents(config, Arm::treated, treated_rng);
  CHECK(std::abs(mean(treated.pre, 0) - 0.4) < se);
  CHECK(std::abs(mean(treated.pre, 1) - 0.6) < se);
  for (std::size_t i = 0; i < treated.pre.size(); ++i) {
    CHECK(treated.pre.coord(i, 0) == treated.post.coord(i, 0));
    CHECK(treated.pre.coord(i, 1) == treated.post.coord(i, 1));
  }
}

TEST_CASE("production maps mix coordinates with opposite signs") {
  const std::vector<double> u = {1.0, 2.0};
  const auto pre = otcic::apply_production(u, ProductionFn::h0, 0.5);
  CHECK(pre[0] == doctest::Approx(2.0));
  CHECK(pre[1] == doctest::Approx(2.5));
  const auto post = otcic::apply_production(u, ProductionFn::h1, 0.5);
  CHECK(post[0] == doctest::Approx(0.0));
  CHECK(post[1] == doctest::Approx(1.5));
}

TEST_CASE("the production pair is co-monotone with the expected strength") {
  // For any latent pair, the displacement inner product collapses to
  // (1 - alpha^2) times the squared latent distance.
  const double alpha = 0.5;
  Rng rng(303);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::vector<double> u = {rng.uniform(), rng.uniform()};
    const std::vector<double> v = {rng.uniform(), rng.uniform()};
    const auto pre_u = otcic::apply_production(u, ProductionFn::h0, alpha);
    const auto pre_v = otcic::apply_production(v, ProductionFn::h0, alpha);
    const auto post_u = otcic::apply_production(u, ProductionFn::h1, alpha);
    const auto post_v = otcic::apply_production(v, ProductionFn::h1, alpha);

    const double inner = (pre_u[0] - pre_v[0]) * (post_u[0] - post_v[0]) +
                         (pre_u[1] - pre_v[1]) * (post_u[1] - post_v[1]);
    const double du = u[0] - v[0];
    const double dv = u[1] - v[1];
    const double expected = (1.0 - alpha * alpha) * (du * du + dv * dv);
    CHECK(std::abs(inner - expected) < 1e-10);
  }
}

TEST_CASE("each marginal alone violates monotonicity") {
  // Latents differing only in the second coordinate move the first outcome
  // coordinate in opposite directions across periods: the product is
  // -alpha^2 z^2 < 0, so coordinatewise reasoning misses the joint geometry.
  const double alpha = 0.5;
  Rng rng(304);
  for (int trial = 0; trial < 100; ++trial) {
    const double z = rng.uniform(0.05, 1.0);
    const std::vector<double> u = {0.3, 0.2 + z};
    const std::vector<double> v = {0.3, 0.2};
    const auto pre_u = otcic::apply_production(u, ProductionFn::h0, alpha);
    const auto pre_v = otcic::apply_production(v, ProductionFn::h0, alpha);
    const auto post_u = otcic::apply_production(u, ProductionFn::h1, alpha);
    const auto post_v = otcic::apply_production(v, ProductionFn::h1, alpha);

    const double product = (pre_u[0] - pre_v[0]) * (post_u[0] - post_v[0]);
    CHECK(std::abs(product - (-alpha * alpha * z * z)) < 1e-12);
    CHECK(product < 0.0);
  }
}

TEST_CASE("mesh-averaged CDF distance matches a naive double loop") {
  Rng rng(305);
  const PointCloud a = random_cloud(rng, 40);
  const PointCloud b = random_cloud(rng, 55);
  const PointCloud mesh = random_cloud(rng, 200);

  double expected = 0.0;
  for (std::size_t t = 0; t < mesh.size(); ++t) {
    const double x = mesh.coord(t, 0);
    const double y = mesh.coord(t, 1);
    expected += std::abs(naive_joint_ecdf(a, x, y) - naive_joint_ecdf(b, x, y));
  }
  expected /= static_cast<double>(mesh.size());

  CHECK(otcic::ecdf_mad(a, b, mesh) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(otcic::ecdf_mad(a, a, mesh) == 0.0);
}

TEST_CASE("density estimates match the closed form for a single point") {
  const PointCloud sample({0.0, 0.0}, 2);
  const double h = 0.5;
  const auto grid = otcic::kde_grid(sample, h, {-1.0, -1.0}, {1.0, 1.0}, 9);
  REQUIRE(grid.xs.size() == 9);
  REQUIRE(grid.ys.size() == 9);
  const double norm = 1.0 / (2.0 * 3.141592653589793238462643 * h * h);
  for (std::size_t j = 0; j < grid.ys.size(); ++j) {
    for (std::size_t i = 0; i < grid.xs.size(); ++i) {
      const double r2 = grid.xs[i] * grid.xs[i] + grid.ys[j] * grid.ys[j];
      const double expected = norm * std::exp(-r2 / (2.0 * h * h));
      CHECK(grid.density[j * grid.xs.size() + i] == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("density estimates integrate to one over a wide box") {
  Rng rng(306);
  const PointCloud sample = random_cloud(rng, 50);
  const double h = 0.3;
  const std::size_t res = 160;
  const auto grid = otcic::kde_grid(sample, h, {-4.0, -4.0}, {5.0, 5.0}, res);
  const double dx = (5.0 - -4.0) / static_cast<double>(res - 1);
  double mass = 0.0;
  for (const double f : grid.density) mass += f * dx * dx;
  CHECK(mass == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("small replication studies are reproducible and favor transport") {
  SyntheticConfig config;
  config.n = 250;
  config.runs = 2;
  config.mesh_points = 400;
  config.kde_resolution = 16;
  config.marginal_resolution = 32;
  config.seed = 99;

  const auto first = otcic::run_experiment(config);
  const auto second = otcic::run_experiment(config);
  REQUIRE(first.per_run.size() == 2);
  for (std::size_t r = 0; r < first.per_run.size(); ++r) {
    CHECK(first.per_run[r].mad_ot == second.per_run[r].mad_ot);
    CHECK(first.per_run[r].mad_cic == second.per_run[r].mad_cic);
    CHECK(first.per_run[r].mad_ot < first.per_run[r].mad_cic);
  }
  CHECK(first.mean_mad_ot == second.mean_mad_ot);
  CHECK(first.sd_mad_cic == second.sd_mad_cic);

  SyntheticConfig threaded = config;
  threaded.threads = 3;
  const auto parallel = otcic::run_experiment(threaded);
  for (std::size_t r = 0; r < first.per_run.size(); ++r) {
    CHECK(first.per_run[r].mad_ot == parallel.per_run[r].mad_ot);
    CHECK(first.per_run[r].mad_cic == parallel.per_run[r].mad_cic);
  }
  CHECK(first.kde_ot.density == parallel.kde_ot.density);
  CHECK(first.mesh_quantiles.size() == parallel.mesh_quantiles.size());

  // Plot data comes from the first run.
  REQUIRE(first.marginals.size() == 2 * config.marginal_resolution);
  REQUIRE(first.kde_true.density.size() == config.kde_resolution * config.kde_resolution);
  REQUIRE(first.mesh_quantiles.size() == config.mesh_points);
  for (std::size_t t = 1; t < first.mesh_quantiles.size(); ++t) {
    CHECK(first.mesh_quantiles[t].level > first.mesh_quantiles[t - 1].level);
    CHECK(first.mesh_quantiles[t].ecdf_true >= first.mesh_quantiles[t - 1].ecdf_true);
  }
}

TEST_CASE("lattice meshes run end to end and stay deterministic") {
  SyntheticConfig config;
  config.n = 120;
  config.runs = 1;
  config.mesh_points = 90;  // rounds up to the 100-point lattice
  config.kde_resolution = 8;
  config.marginal_resolution = 16;
  config.lattice_mesh = true;
  config.seed = 7;

  const auto report = otcic::run_experiment(config);
  CHECK(report.mesh_quantiles.size() == 100);
  const auto again = otcic::run_experiment(config);
  CHECK(report.per_run[0].mad_ot == again.per_run[0].mad_ot);
}
