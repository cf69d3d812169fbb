#pragma once

#include <string>
#include <vector>

#include "wde/estimators.hpp"
#include "wde/grid.hpp"

namespace wde {

/// Domain of the mixture target used by the simulation study.
Box default_target_box();

/// Cells per unit length for quadrature of an estimate: 2^{finest level + 1}
/// for Haar (aligned midpoints integrate piecewise constants exactly),
/// `smooth_cells` otherwise.
int default_cells_per_unit(const DensityEstimate& est, int smooth_cells = 256);

/// Aligned grid over the union of the estimate's support and `domain`.
QuadratureGrid estimate_grid(const DensityEstimate& est, const Box& domain, int cells_per_unit);

struct Normalized {
  DensityEstimate estimate;   // positive part divided by mass
  double mass = 0.0;          // S = int max(f, 0)
  std::vector<double> values; // normalized values at the grid nodes
};

/// f_hat = max(f, 0) / S with S on the grid; S below 1e-12 is degenerate.
Normalized normalize(const DensityEstimate& est, const QuadratureGrid& grid);

/// int (f_hat - f)^2 on the grid.
double ise(const DensityEstimate& est, const DensityFn& target, const QuadratureGrid& grid);

/// int f_hat^2 - 2 int f_hat f on the grid.
double ver_exact(const DensityEstimate& est, const DensityFn& target, const QuadratureGrid& grid);

/// int f_hat^2: sum of squared stored coefficients for raw estimates,
/// grid quadrature for normalized ones.
double l2_norm_sq(const DensityEstimate& est, const QuadratureGrid& grid);

/// Mean of the estimate over the validation points.
double validation_mean(const DensityEstimate& est, const Sample& validation);

/// int f_hat^2 - (2/|V|) sum_{v in V} f_hat(v).
double ver_hat(const DensityEstimate& est, const Sample& validation, const QuadratureGrid& grid);

/// Same criterion with the quadratic term supplied by the caller.
double ver_hat_from(double l2_sq, const DensityEstimate& est, const Sample& validation);

/// 2x2 (or splits^d) equal boxes partitioning `domain`.
std::vector<Box> default_regions(const Box& domain, int splits = 2);

/// Detail energy sum upsilon^2 of a pilot Haar estimate at level j whose
/// support centre falls in each region; larger means rougher.
std::vector<double> region_roughness(const Sample& pilot, const std::vector<Box>& regions, int j);

struct PrimaryLevel {
  int j_star = 0;
  std::vector<int> region_levels;             // j_k per region
  std::vector<std::vector<double>> criteria;  // [region][level - j_lo]
};

/// For each region R_k, the level in [j_lo, j_hi] minimizing
/// int_{R_k} f_j^2 - (2/|V|) sum_{v in V cap R_k} f_j(v) for the linear
/// estimate f_j from `train`; j* is the smallest of those minimizers.
/// Ties within 1e-12 go to the smaller level.
PrimaryLevel select_primary_level(const Sample& train, const Sample& validation, const WaveletBasis& basis,
                                  const std::vector<Box>& regions, int j_lo, int j_hi, int smooth_cells = 256);

struct VerCell {
  std::size_t sample_size = 0;
  int j = 0;
  std::string estimator;  // linear | hard
  double threshold = 0.0;
  double mean = 0.0;
  double std = 0.0;
  std::size_t reps = 0;
  bool is_min = false;
};

/// Mean and sample standard deviation (n - 1 denominator; zero for n = 1).
std::pair<double, double> mean_std(const std::vector<double>& values);

/// Aggregated criterion table. is_min marks the smallest mean within each
/// sample-size block.
struct VerReport {
  std::string wavelet;
  std::string variant;  // raw | normalized
  std::vector<VerCell> cells;

  void add(std::size_t sample_size, int j, const std::string& estimator, double threshold,
           const std::vector<double>& values);
  void mark_minima();
  const VerCell* find(std::size_t sample_size, int j, const std::string& estimator, double threshold) const;
  void write_csv(const std::string& path) const;
};

}  // namespace wde
