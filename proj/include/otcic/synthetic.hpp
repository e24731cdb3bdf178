#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "otcic/point_cloud.hpp"
#include "otcic/rng.hpp"

namespace otcic {

// Configuration of the two-coordinate simulation study. Defaults reproduce
// the headline comparison: 3000 units per arm, mixing parameter 0.5, a
// 10000-point evaluation mesh, kernel bandwidth 0.5, 20 repetitions.
struct SyntheticConfig {
  std::size_t n = 3000;
  double alpha = 0.5;
  std::uint64_t seed = 1;
  std::size_t mesh_points = 10000;
  double kde_bandwidth = 0.5;
  std::size_t runs = 20;
  // Plot-data resolutions: kde_resolution is the side length of the density
  // grid, marginal_resolution the number of per-coordinate CDF sample points.
  std::size_t kde_resolution = 64;
  std::size_t marginal_resolution = 512;
  // Evaluation mesh: seeded uniform random points by default; a regular
  // lattice (rounded up to the next square count) when lattice_mesh is set.
  bool lattice_mesh = false;
  unsigned threads = 1;

  // Throws std::invalid_argument when a field is out of range. The mixing
  // parameter must satisfy 0 < alpha < 1: equality breaks the co-monotone
  // geometry the transport estimator relies on.
  void validate() const;
};

enum class Arm { control, treated };
enum class ProductionFn { h0, h1 };

struct LatentSample {
  PointCloud pre;
  PointCloud post;  // same values as pre for the treated arm
};

// Latent positions per arm. Controls draw coordinates Beta(3,2) x Beta(2,3)
// independently in each period; treated units draw Beta(2,3) x Beta(3,2)
// once and keep the same positions in both periods, which makes the true
// counterfactual outcome of every treated unit computable.
LatentSample sample_latents(const SyntheticConfig& config, Arm arm, Rng& rng);

// Linear production functions on the plane. h0 mixes coordinates with weight
// +alpha, h1 with weight -alpha; the pair is co-monotone for 0 < alpha < 1
// even though each marginal taken alone is not monotone.
std::array<double, 2> apply_production(std::span<const double> u, ProductionFn which,
                                       double alpha);
PointCloud apply_production(const PointCloud& latents, ProductionFn which, double alpha);

// Mean absolute difference between the joint empirical CDFs of a and b,
// averaged over the mesh points. Points are treated as equally weighted.
double ecdf_mad(const PointCloud& a, const PointCloud& b, const PointCloud& mesh);

// Density surface on a rectangular grid: density[j * xs.size() + i] is the
// estimate at (xs[i], ys[j]).
struct KdeGrid {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> density;
};

// Isotropic Gaussian kernel density estimate of a 2-D sample, evaluated on a
// resolution x resolution grid spanning [lo, hi].
KdeGrid kde_grid(const PointCloud& sample, double bandwidth, std::array<double, 2> lo,
                 std::array<double, 2> hi, std::size_t resolution);

struct RunScores {
  double mad_ot = 0.0;
  double mad_cic = 0.0;
};

// One coordinate's empirical CDF values at x, for the true counterfactual
// sample and the two estimates.
struct MarginalRow {
  std::size_t coord = 0;
  double x = 0.0;
  double ecdf_true = 0.0;
  double ecdf_ot = 0.0;
  double ecdf_cic = 0.0;
};

// Sorted empirical-CDF values over the mesh: level is the rank fraction, the
// remaining columns are each method's level-th smallest eCDF value.
struct MeshQuantileRow {
  double level = 0.0;
  double ecdf_true = 0.0;
  double ecdf_ot = 0.0;
  double ecdf_cic = 0.0;
};

struct ExperimentReport {
  double mean_mad_ot = 0.0;
  double sd_mad_ot = 0.0;
  double mean_mad_cic = 0.0;
  double sd_mad_cic = 0.0;
  std::vector<RunScores> per_run;
  // Plot data from the first run.
  std::vector<MarginalRow> marginals;
  KdeGrid kde_true;
  KdeGrid kde_ot;
  KdeGrid kde_cic;
  std::vector<MeshQuantileRow> mesh_quantiles;
};

// Full repetition study: per run, draw fresh arms, build true and estimated
// counterfactual samples (transport map with mode rounding vs coordinatewise
// quantile mapping), and score both against the truth on a fresh mesh drawn
// over the union bounding box of the three counterfactual samples padded by
// one bandwidth. Runs execute in parallel when config.threads > 1; results
// are bit-identical for a given seed regardless of thread count.
ExperimentReport run_experiment(const SyntheticConfig& config);

}  // namespace otcic
