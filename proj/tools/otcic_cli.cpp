#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "otcic/ck.hpp"
#include "otcic/estimators.hpp"
#include "otcic/io.hpp"
#include "otcic/kernels.hpp"
#include "otcic/ot.hpp"
#include "otcic/panel.hpp"
#include "otcic/synthetic.hpp"
#include "otcic/transport.hpp"

namespace {

using otcic::io::json;

// OTCIC_THREADS sets the default for every --threads flag; --threads 1 forces
// serial execution regardless.
unsigned default_threads() {
  const char* env = std::getenv("OTCIC_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long value = std::strtol(env, &end, 10);
  if (end == nullptr || *end != '\0' || value < 1) {
    std::fprintf(stderr, "warning: ignoring OTCIC_THREADS='%s' (want a positive integer)\n", env);
    return 1;
  }
  return static_cast<unsigned>(value);
}

void prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::invalid_argument("cannot create output directory " + dir + ": " + ec.message());
  }
}

// Collects written file names so the manifest can checksum them afterwards.
struct Writer {
  std::string dir;
  std::vector<std::string> written;

  void write(const std::string& name, std::string_view content) {
    otcic::io::write_file_atomic(dir + "/" + name, content);
    written.push_back(name);
  }
};

void finish(const Writer& w, const char* command, bool quiet) {
  if (quiet) return;
  std::printf("%s: wrote %zu files to %s\n", command, w.written.size() + 1, w.dir.c_str());
}

otcic::Rounding parse_rounding(const std::string& name) {
  return name == "barycentric" ? otcic::Rounding::barycentric : otcic::Rounding::mode;
}

struct SimulateArgs {
  otcic::SyntheticConfig config;
  std::string mesh_mode = "random";
  std::string out_dir = "out";
};

int run_simulate(SimulateArgs args, bool quiet, bool verbose) {
  args.config.lattice_mesh = args.mesh_mode == "lattice";
  args.config.validate();
  prepare_out_dir(args.out_dir);
  if (verbose) {
    const std::string isa(otcic::kernels::isa_name());
    std::fprintf(stderr, "simulate: %zu runs at n=%zu, threads=%u, kernels=%s\n", args.config.runs,
                 args.config.n, args.config.threads, isa.c_str());
  }
  const otcic::ExperimentReport report = otcic::run_experiment(args.config);

  Writer w{args.out_dir, {}};
  w.write("report.json", otcic::io::experiment_json(args.config, report).dump(2) + "\n");
  w.write("per_run.csv", otcic::io::per_run_csv(report));
  w.write("marginals.csv", otcic::io::marginals_csv(report));
  w.write("kde.csv", otcic::io::kde_csv(report));
  w.write("mesh_quantiles.csv", otcic::io::mesh_quantiles_csv(report));

  json config;
  config["command"] = "simulate";
  config["n"] = args.config.n;
  config["alpha"] = args.config.alpha;
  config["seed"] = args.config.seed;
  config["runs"] = args.config.runs;
  config["mesh_points"] = args.config.mesh_points;
  config["mesh_mode"] = args.mesh_mode;
  config["kde_bandwidth"] = args.config.kde_bandwidth;
  config["kde_resolution"] = args.config.kde_resolution;
  config["marginal_resolution"] = args.config.marginal_resolution;
  config["threads"] = args.config.threads;
  otcic::io::write_manifest(args.out_dir, config, {}, w.written);
  finish(w, "simulate", quiet);
  return 0;
}

struct EstimateArgs {
  std::string data;
  std::string method;
  std::string rounding = "mode";
  unsigned qte_points = 19;
  bool dump_plan = false;
  bool couple = false;
  std::string out_dir = "out";
};

int run_estimate(const EstimateArgs& args, bool quiet, bool verbose) {
  const std::string content = otcic::io::read_file(args.data);
  const otcic::PanelDataset panel = otcic::io::load_panel_csv(args.data);
  if (verbose) {
    std::fprintf(stderr, "estimate: %s on %zu records in %zu dimensions\n", args.method.c_str(),
                 panel.records().size(), panel.dim());
  }
  if ((args.couple || args.dump_plan) && args.method == "did") {
    throw std::invalid_argument("--couple and --dump-plan require method cic or ot_cic");
  }
  if (args.dump_plan && args.method == "cic" && panel.dim() != 1) {
    throw std::invalid_argument(
        "--dump-plan with method cic needs one-dimensional data (no joint map above that)");
  }
  prepare_out_dir(args.out_dir);

  const otcic::Rounding rounding = parse_rounding(args.rounding);
  otcic::EffectReport report;
  std::optional<otcic::CounterfactualResult> result;
  if (args.method == "did") {
    report = otcic::did_estimate(panel);
  } else if (args.method == "cic") {
    auto pair = otcic::cic_estimate(panel);
    result = std::move(pair.first);
    report = std::move(pair.second);
  } else {
    auto pair = otcic::ot_cic_estimate(panel, rounding);
    result = std::move(pair.first);
    report = std::move(pair.second);
  }

  if (report.qte && result && args.qte_points != 19) {
    const otcic::PointCloud star = panel.cell(otcic::Group::treated, otcic::Period::post);
    otcic::QteCurve curve;
    const std::size_t dim = panel.dim();
    for (unsigned i = 1; i <= args.qte_points; ++i) {
      const double q = static_cast<double>(i) / (args.qte_points + 1.0);
      curve.grid.push_back(q);
      std::vector<double> row(dim);
      for (std::size_t k = 0; k < dim; ++k) {
        row[k] = otcic::empirical_quantile(star.coordinate(k), q) -
                 otcic::empirical_quantile(result->counterfactuals.coordinate(k), q);
      }
      curve.effects.push_back(std::move(row));
    }
    report.qte = std::move(curve);
  }

  if (args.couple && result) {
    result->coupling_map = otcic::couple_counterfactuals(
        panel.cell(otcic::Group::treated, otcic::Period::post), result->counterfactuals);
  }

  std::optional<otcic::TransportPlan> plan;
  if (args.dump_plan) {
    const otcic::PointCloud c0 = panel.cell(otcic::Group::control, otcic::Period::pre);
    const otcic::PointCloud c1 = panel.cell(otcic::Group::control, otcic::Period::post);
    plan = args.method == "ot_cic" ? otcic::solve_ot(c0, c1) : otcic::solve_ot_1d(c0, c1);
  }

  Writer w{args.out_dir, {}};
  w.write("effects.json", otcic::io::effect_report_json(report).dump(2) + "\n");
  if (report.qte) w.write("qte.csv", otcic::io::qte_csv(report));
  if (result) w.write("counterfactuals.csv", otcic::io::counterfactuals_csv(*result));
  if (report.has_unit_effects()) w.write("unit_effects.csv", otcic::io::unit_effects_csv(report));
  if (plan) w.write("plan.json", otcic::io::plan_json(*plan).dump(2) + "\n");
  if (result && result->coupling_map) w.write("coupling.csv", otcic::io::coupling_csv(*result->coupling_map));

  json config;
  config["command"] = "estimate";
  config["data"] = args.data;
  config["method"] = args.method;
  config["rounding"] = args.rounding;
  config["qte_points"] = args.qte_points;
  config["dump_plan"] = args.dump_plan;
  config["couple"] = args.couple;
  otcic::io::write_manifest(args.out_dir, config, {{args.data, otcic::io::fnv1a64_hex(content)}},
                            w.written);
  finish(w, "estimate", quiet);
  return 0;
}

struct CkArgs {
  std::string data;
  std::string analysis;
  std::size_t reps = 10000;
  double drop_frac = 0.2;
  std::uint64_t seed = 1;
  std::string rounding = "mode";
  bool fixed_sample = false;
  unsigned threads = 1;
  std::string out_dir = "out";
};

int run_ck(const CkArgs& args, bool quiet, bool verbose) {
  const std::string content = otcic::io::read_file(args.data);
  const std::vector<otcic::CkRecord> records = otcic::load_ck(args.data);
  if (verbose) {
    std::fprintf(stderr, "ck %s: %zu survey records, threads=%u\n", args.analysis.c_str(),
                 records.size(), args.threads);
  }
  prepare_out_dir(args.out_dir);

  Writer w{args.out_dir, {}};
  if (args.analysis == "table2") {
    const otcic::Table2Result result = otcic::run_table2(records);
    w.write("table2.json", otcic::io::table2_json(result).dump(2) + "\n");
    w.write("quantile_curves.csv", otcic::io::quantile_curves_csv(result.quantile_curves));
    w.write("conditional_bands.csv", otcic::io::conditional_bands_csv(result.conditional_bands));
    w.write("unit_effects.csv", otcic::io::ck_unit_effects_csv(result.unit_effects));
  } else if (args.analysis == "sweep") {
    otcic::SweepOptions options;
    options.fixed_sample = args.fixed_sample;
    options.rounding = parse_rounding(args.rounding);
    options.threads = args.threads;
    const otcic::SweepReport report = otcic::run_covariate_sweep(records, options);
    w.write("sweep.json", otcic::io::sweep_json(options, report).dump(2) + "\n");
    w.write("sweep_rows.csv", otcic::io::sweep_rows_csv(report.rows));
  } else {
    otcic::UnitDropOptions options;
    options.drop_frac = args.drop_frac;
    options.reps = args.reps;
    options.seed = args.seed;
    options.rounding = parse_rounding(args.rounding);
    options.threads = args.threads;
    const otcic::UnitDropReport report = otcic::run_unit_drop(records, options);
    w.write("unit_drop.json", otcic::io::unit_drop_json(options, report).dump(2) + "\n");
    w.write("unit_drop.csv", otcic::io::unit_drop_csv(report));
  }

  json config;
  config["command"] = "ck";
  config["data"] = args.data;
  config["analysis"] = args.analysis;
  config["rounding"] = args.rounding;
  config["threads"] = args.threads;
  config["reps"] = args.reps;
  config["drop_frac"] = args.drop_frac;
  config["seed"] = args.seed;
  config["fixed_sample"] = args.fixed_sample;
  otcic::io::write_manifest(args.out_dir, config, {{args.data, otcic::io::fnv1a64_hex(content)}},
                            w.written);
  finish(w, "ck", quiet);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counterfactual estimation via discrete optimal transport", "otcic"};
  app.set_version_flag("--version", otcic::io::kVersion);
  app.set_config("--config", "", "Read options from a TOML/INI file (one section per subcommand)");
  bool quiet = false;
  bool verbose = false;
  app.add_flag("--quiet", quiet, "Suppress the final summary line");
  app.add_flag("-v,--verbose", verbose, "Print progress to stderr");
  app.require_subcommand(1);
  const unsigned env_threads = default_threads();

  SimulateArgs sim;
  sim.config.threads = env_threads;
  CLI::App* simulate = app.add_subcommand("simulate", "Two-period synthetic experiment");
  simulate->fallthrough();
  simulate->add_option("--n", sim.config.n, "Sample size per panel cell")->capture_default_str();
  simulate->add_option("--alpha", sim.config.alpha, "Interaction strength in (0,1)")->capture_default_str();
  simulate->add_option("--seed", sim.config.seed, "Master seed")->capture_default_str();
  simulate->add_option("--runs", sim.config.runs, "Independent replications")->capture_default_str();
  simulate->add_option("--mesh-points,--mesh", sim.config.mesh_points, "Evaluation mesh size")
      ->capture_default_str();
  simulate->add_option("--mesh-mode", sim.mesh_mode, "Mesh draw: random or lattice")
      ->check(CLI::IsMember({"random", "lattice"}))
      ->capture_default_str();
  simulate->add_option("--kde-bandwidth", sim.config.kde_bandwidth, "Gaussian KDE bandwidth")
      ->capture_default_str();
  simulate->add_option("--kde-resolution", sim.config.kde_resolution, "KDE grid points per axis")
      ->capture_default_str();
  simulate->add_option("--marginal-resolution", sim.config.marginal_resolution,
                       "Points per marginal CDF curve")
      ->capture_default_str();
  simulate->add_option("--threads", sim.config.threads, "Worker threads (1 = serial)")
      ->capture_default_str();
  simulate->add_option("--out-dir", sim.out_dir, "Output directory")->capture_default_str();

  EstimateArgs est;
  CLI::App* estimate = app.add_subcommand("estimate", "Estimate effects from a panel CSV");
  estimate->fallthrough();
  estimate->add_option("--data", est.data, "Panel CSV (id,group,period,y1..yd)")
      ->required()
      ->check(CLI::ExistingFile);
  estimate->add_option("--method", est.method, "Estimator")
      ->required()
      ->check(CLI::IsMember({"did", "cic", "ot_cic"}));
  estimate->add_option("--rounding", est.rounding, "Map rounding for ot_cic")
      ->check(CLI::IsMember({"mode", "barycentric"}))
      ->capture_default_str();
  estimate->add_option("--qte-points", est.qte_points, "Interior quantiles in the effect curve")
      ->check(CLI::Range(1u, 9999u))
      ->capture_default_str();
  estimate->add_flag("--dump-plan", est.dump_plan,
                     "Also write the control-drift transport plan (plan.json)");
  estimate->add_flag("--couple", est.couple,
                     "Also pair treated post outcomes with counterfactuals (coupling.csv)");
  estimate->add_option("--out-dir", est.out_dir, "Output directory")->capture_default_str();

  CkArgs ck;
  ck.threads = env_threads;
  CLI::App* ck_cmd = app.add_subcommand("ck", "Minimum-wage survey reanalysis");
  ck_cmd->fallthrough();
  ck_cmd->add_option("--data", ck.data, "Survey CSV (see docs/data-format.md)")
      ->required()
      ->check(CLI::ExistingFile);
  ck_cmd->add_option("--analysis", ck.analysis, "Which analysis to run")
      ->required()
      ->check(CLI::IsMember({"table2", "sweep", "unit-drop"}));
  ck_cmd->add_option("--reps", ck.reps, "Unit-drop replications")->capture_default_str();
  ck_cmd->add_option("--drop-frac", ck.drop_frac, "Fraction dropped per group and rep")
      ->check(CLI::Range(0.0, 0.999))
      ->capture_default_str();
  ck_cmd->add_option("--seed", ck.seed, "Unit-drop seed")->capture_default_str();
  ck_cmd->add_option("--rounding", ck.rounding, "Map rounding for the transport estimate")
      ->check(CLI::IsMember({"mode", "barycentric"}))
      ->capture_default_str();
  ck_cmd->add_flag("--fixed-sample", ck.fixed_sample,
                   "Sweep reuses the all-covariate-complete unit set for every subset");
  ck_cmd->add_option("--threads", ck.threads, "Worker threads (1 = serial)")->capture_default_str();
  ck_cmd->add_option("--out-dir", ck.out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim, quiet, verbose);
    if (estimate->parsed()) return run_estimate(est, quiet, verbose);
    return run_ck(ck, quiet, verbose);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
