#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

#include "wde/besov.hpp"
#include "wde/gmrf.hpp"
#include "wde/postprocess.hpp"

namespace wde {

struct ExperimentConfig {
  std::vector<int> sizes{20, 35, 50, 65};  // lattice side lengths n_1 = n_2
  int reps = 100;
  std::vector<std::string> wavelets{"haar", "d4"};
  int j_lo = 0;  // coarse level of the hard estimator and first linear level
  int j_hi = 4;  // last linear level and last j1 of the hard estimator
  std::vector<double> multiples{0.1, 0.2, 0.3};
  std::array<double, kFieldComponents> eta = kDefaultEta;
  double rho12 = 0.1;
  double rho34 = 0.1;
  std::uint64_t seed = 20240607;
  bool iid = false;
  std::string out = "wde_out";
  int iterations = 1000;
  int workers = 1;
  std::string scope = "level";  // level | global threshold maximum
  double train_fraction = 0.9;
  int smooth_cells = 256;       // quadrature cells per unit for D4
  int cascade_depth = 12;
  // rate study
  double holder_r = 1.0;
  double p_loss = 2.0;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Throws InvalidArgument on inconsistent settings and NonInvertible
  /// (with the admissible interval) for an inadmissible eta.
  void validate() const;
  ThresholdScope threshold_scope() const;
};

ExperimentConfig load_config(const std::string& path);

/// Seed of replication `rep` at side length `side`; independent of the
/// order in which replications run.
std::uint64_t replication_seed(std::uint64_t seed, int side, int rep);

/// Five coupled fields for one replication: conclique chain, or the
/// independent reference sampler when config.iid is set.
MultiField simulate_fields(const ExperimentConfig& config, int side, int rep);

/// Mixture-target sample for one replication, row-major over sites.
Sample simulate_sample(const ExperimentConfig& config, int side, int rep);

/// Row-major sites and points as CSV: site_row, site_col, y1, y2.
void write_sample_csv(const std::string& path, const LatticeShape& shape, const Sample& sample);

/// Parses the sample CSV; errors name the offending line.
struct LatticeSample {
  LatticeShape shape{{1, 1}};
  Sample sample;
};
LatticeSample read_sample_csv(const std::string& path);

/// Train/validate split of a lattice sample.
std::pair<Sample, Sample> split_sample(const LatticeShape& shape, const Sample& sample, double fraction);

/// One criterion value of one replication.
struct RepRecord {
  std::size_t sample_size = 0;
  int rep = 0;
  std::string wavelet;
  std::string estimator;  // linear | hard
  int j = 0;              // linear level, or j1 of the hard estimator
  double threshold = 0.0;
  double raw = 0.0;         // ver-hat with int f^2 from the coefficients
  double normalized = 0.0;  // ver-hat of the normalized positive part
  double mass = 0.0;        // S of the normalization
};

/// Every table configuration for one train/validate pair.
std::vector<RepRecord> evaluate_replication(const ExperimentConfig& config, const Sample& train,
                                            const Sample& validation, std::size_t sample_size, int rep);

struct TableResult {
  std::vector<RepRecord> records;
  std::vector<VerReport> reports;  // per wavelet and variant
  double seconds = 0.0;
};

/// Simulates, estimates and aggregates; writes per-replication CSVs under
/// out/reps, report CSVs under out and a run.json with the config echo.
TableResult run_table(const ExperimentConfig& config, bool write = true);

/// Rebuilds reports from records (also used to re-aggregate artifacts).
std::vector<VerReport> aggregate(const std::vector<RepRecord>& records);

std::vector<RepRecord> read_rep_records(const std::string& dir);

struct RatePoint {
  std::size_t sample_size = 0;
  int linear_level = 0;
  double linear_mean = 0.0;
  double linear_se = 0.0;
  int j0 = 0;
  int j1 = 0;
  double hard_mean = 0.0;
  double hard_se = 0.0;
};

struct RateResult {
  std::vector<RatePoint> points;
  double s_eff = 0.0;
  double predicted_slope = 0.0;  // -2s'/(2s'+1)
  double linear_slope = 0.0;     // least squares in log-log
  double hard_slope = 0.0;
};

/// Mean ISE of the Haar linear estimator at linear_level and of the hard
/// estimator at the rate_params schedule, on the ramp density 2 x_1.
RateResult run_rates(const ExperimentConfig& config, bool write = true);

/// Least-squares slope of log(y) on log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Runs body(i) for i in [0, count) on up to `workers` threads.
void parallel_for(int count, int workers, const std::function<void(int)>& body);

}  // namespace wde
