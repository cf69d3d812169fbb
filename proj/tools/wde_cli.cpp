#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "wde/error.hpp"
#include "wde/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::string config;
  std::vector<int> sizes;
  std::optional<int> reps;
  std::string wavelet;
  std::optional<int> j0;
  std::optional<int> j1;
  std::vector<double> mult;
  std::vector<double> eta;
  std::optional<std::uint64_t> seed;
  bool iid = false;
  std::string out;
  std::optional<int> iterations;
  std::optional<int> workers;
  std::string scope;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "flat JSON config file");
  cmd->add_option("--sizes", o.sizes, "lattice side lengths")->delimiter(',');
  cmd->add_option("--reps", o.reps, "replications");
  cmd->add_option("--wavelet", o.wavelet, "haar | d4 | both");
  cmd->add_option("--j0", o.j0, "first level");
  cmd->add_option("--j1", o.j1, "last level");
  cmd->add_option("--mult", o.mult, "threshold multiples")->delimiter(',');
  cmd->add_option("--eta", o.eta, "five interaction parameters")->delimiter(',');
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_flag("--iid", o.iid, "independent reference samples");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--iterations", o.iterations, "MCMC sweeps");
  cmd->add_option("--workers", o.workers, "parallel replications");
  cmd->add_option("--scope", o.scope, "level | global threshold maximum");
}

wde::ExperimentConfig resolve(const Overrides& o) {
  wde::ExperimentConfig c = o.config.empty() ? wde::ExperimentConfig{} : wde::load_config(o.config);
  if (!o.sizes.empty()) c.sizes = o.sizes;
  if (o.reps) c.reps = *o.reps;
  if (!o.wavelet.empty()) {
    c.wavelets = o.wavelet == "both" ? std::vector<std::string>{"haar", "d4"} : std::vector<std::string>{o.wavelet};
  }
  if (o.j0) c.j_lo = *o.j0;
  if (o.j1) c.j_hi = *o.j1;
  if (!o.mult.empty()) c.multiples = o.mult;
  if (!o.eta.empty()) {
    if (o.eta.size() != wde::kFieldComponents) {
      throw wde::Error(wde::ErrorCode::InvalidArgument, "--eta needs five values");
    }
    std::copy(o.eta.begin(), o.eta.end(), c.eta.begin());
  }
  if (o.seed) c.seed = *o.seed;
  if (o.iid) c.iid = true;
  if (!o.out.empty()) c.out = o.out;
  if (o.iterations) c.iterations = *o.iterations;
  if (o.workers) c.workers = *o.workers;
  if (!o.scope.empty()) c.scope = o.scope;
  c.validate();
  return c;
}

void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

int cmd_simulate(const wde::ExperimentConfig& c) {
  const std::string dir = c.out + "/samples";
  ensure_dir(dir);
  const std::string mode = c.iid ? "iid" : "mcmc";
  for (int side : c.sizes) {
    const wde::LatticeShape shape = wde::square_lattice(side);
    std::vector<wde::Sample> samples(static_cast<std::size_t>(c.reps));
    wde::parallel_for(c.reps, c.workers, [&](int rep) {
      samples[static_cast<std::size_t>(rep)] = wde::simulate_sample(c, side, rep);
    });
    for (int rep = 0; rep < c.reps; ++rep) {
      std::ostringstream stem;
      stem << dir << '/' << mode << "_n" << shape.cardinality() << "_rep" << std::setw(4) << std::setfill('0') << rep;
      wde::write_sample_csv(stem.str() + ".csv", shape, samples[static_cast<std::size_t>(rep)]);
      const nlohmann::json meta{{"seed", c.seed},
                                {"replication_seed", wde::replication_seed(c.seed, side, rep)},
                                {"replication", rep},
                                {"eta", std::vector<double>(c.eta.begin(), c.eta.end())},
                                {"rho12", c.rho12},
                                {"rho34", c.rho34},
                                {"iterations", c.iid ? 0 : c.iterations},
                                {"sampler", mode},
                                {"shape", {side, side}}};
      std::ofstream(stem.str() + ".json") << meta.dump(2) << '\n';
    }
    std::cout << "wrote " << c.reps << " samples of " << shape.cardinality() << " sites to " << dir << '\n';
  }
  return 0;
}

struct EstimateArgs {
  std::string sample;
  std::string wavelet = "haar";
  int j0 = 0;
  std::optional<int> j1;
  double mult = 0.1;
  std::string scope = "level";
  bool normalize = false;
  bool target = false;
  double rho = 0.1;
  int cells = 0;
  std::string out = "wde_out";
};

int cmd_estimate(const EstimateArgs& a) {
  ensure_dir(a.out);
  const wde::Box domain = wde::default_target_box();
  if (a.target) {
    const int cpu = a.cells > 0 ? a.cells : 64;
    const wde::QuadratureGrid grid = wde::QuadratureGrid::aligned(domain, cpu);
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) values[i] = wde::target_pdf(grid.point(i), a.rho);
    wde::write_grid_csv(a.out + "/target_grid.csv", grid, values);
    std::cout << "wrote " << a.out << "/target_grid.csv\n";
    return 0;
  }
  if (a.sample.empty()) throw wde::Error(wde::ErrorCode::InvalidArgument, "--sample is required");
  if (a.scope != "level" && a.scope != "global") {
    throw wde::Error(wde::ErrorCode::InvalidArgument, "scope must be level or global");
  }
  const wde::LatticeSample ls = wde::read_sample_csv(a.sample);
  const wde::WaveletBasis basis = wde::basis_by_name(a.wavelet, 2);
  wde::DensityEstimate est = [&] {
    if (!a.j1 || *a.j1 == a.j0) return wde::linear_estimate(ls.sample, basis, a.j0);
    const wde::CoefficientSet full = wde::compute_coefficients(ls.sample, basis, a.j0, *a.j1);
    const auto scope = a.scope == "global" ? wde::ThresholdScope::Global : wde::ThresholdScope::PerLevel;
    const auto thresholds = wde::relative_thresholds(full, a.mult, a.j0, *a.j1, scope);
    return wde::hard_threshold_estimate(full, basis, *a.j1, thresholds);
  }();
  const int cpu = a.cells > 0 ? a.cells : wde::default_cells_per_unit(est);
  const wde::QuadratureGrid grid = wde::estimate_grid(est, domain, cpu);
  std::vector<double> values;
  if (a.normalize) {
    wde::Normalized n = wde::normalize(est, grid);
    est = std::move(n.estimate);
    values = std::move(n.values);
  } else {
    values = wde::evaluate_grid(est, grid);
  }
  wde::write_grid_csv(a.out + "/estimate_grid.csv", grid, values);
  std::ofstream(a.out + "/estimate.json") << wde::to_json(est).dump(2) << '\n';
  std::cout << "wrote " << a.out << "/estimate_grid.csv and estimate.json (" << ls.sample.size() << " points)\n";
  return 0;
}

int cmd_table(const wde::ExperimentConfig& c, bool aggregate_only) {
  std::vector<wde::VerReport> reports;
  if (aggregate_only) {
    reports = wde::aggregate(wde::read_rep_records(c.out + "/reps"));
    const std::string mode = c.iid ? "iid" : "mcmc";
    for (const auto& r : reports) r.write_csv(c.out + "/table_" + mode + "_" + r.wavelet + "_" + r.variant + ".csv");
  } else {
    const wde::TableResult res = wde::run_table(c);
    reports = res.reports;
    std::cout << "table finished in " << std::fixed << std::setprecision(1) << res.seconds << " s\n";
  }
  std::cout << std::setprecision(4);
  for (const auto& r : reports) {
    if (r.variant != "raw") continue;
    std::cout << r.wavelet << " (" << r.variant << ")\n";
    for (const auto& cell : r.cells) {
      std::cout << "  n=" << cell.sample_size << " " << cell.estimator << " j=" << cell.j;
      if (cell.estimator == "hard") std::cout << " mult=" << cell.threshold;
      std::cout << "  " << cell.mean << " (" << cell.std << ")" << (cell.is_min ? " *" : "") << '\n';
    }
  }
  return 0;
}

int cmd_rates(const wde::ExperimentConfig& c) {
  const wde::RateResult r = wde::run_rates(c);
  std::cout << std::setprecision(5) << "s' = " << r.s_eff << ", predicted slope " << r.predicted_slope << '\n';
  for (const auto& p : r.points) {
    std::cout << "  n=" << p.sample_size << " linear j=" << p.linear_level << " ISE " << p.linear_mean << " | hard j0="
              << p.j0 << " j1=" << p.j1 << " ISE " << p.hard_mean << '\n';
  }
  std::cout << "slopes: linear " << r.linear_slope << ", hard " << r.hard_slope << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet density estimation for lattice data"};
  app.require_subcommand(1);

  Overrides sim_o, table_o, rates_o;
  auto* sim = app.add_subcommand("simulate", "simulate lattice samples to CSV");
  add_config_flags(sim, sim_o);
  auto* table = app.add_subcommand("table", "verification-criterion tables");
  add_config_flags(table, table_o);
  bool aggregate_only = false;
  table->add_flag("--aggregate-only", aggregate_only, "rebuild tables from out/reps");
  auto* rates = app.add_subcommand("rates", "ISE rate study on a Lipschitz density");
  add_config_flags(rates, rates_o);

  EstimateArgs est_a;
  auto* est = app.add_subcommand("estimate", "estimate a density from a sample CSV");
  est->add_option("--sample", est_a.sample, "sample CSV (site_row, site_col, y1, y2)");
  est->add_option("--wavelet", est_a.wavelet, "haar | d4")->check(CLI::IsMember({"haar", "d4"}));
  est->add_option("--j0", est_a.j0, "linear level, or coarse level of the hard estimator");
  est->add_option("--j1", est_a.j1, "finest level of the hard estimator");
  est->add_option("--mult", est_a.mult, "relative threshold multiple");
  est->add_option("--scope", est_a.scope, "level | global threshold maximum");
  est->add_flag("--normalize", est_a.normalize, "positive part scaled to unit mass");
  est->add_flag("--target", est_a.target, "emit the mixture target density grid instead");
  est->add_option("--rho", est_a.rho, "target correlation for --target");
  est->add_option("--cells", est_a.cells, "grid cells per unit length");
  est->add_option("--out", est_a.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  const Overrides* overrides = sim->parsed() ? &sim_o : table->parsed() ? &table_o : rates->parsed() ? &rates_o : nullptr;
  wde::ExperimentConfig config;
  try {
    if (overrides) config = resolve(*overrides);
  } catch (const wde::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(config);
    if (table->parsed()) return cmd_table(config, aggregate_only);
    if (rates->parsed()) return cmd_rates(config);
    return cmd_estimate(est_a);
  } catch (const wde::Error& e) {
    std::cerr << (e.numerical() ? "numerical error: " : "error: ") << e.what() << '\n';
    return e.numerical() ? kExitNumerical : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
