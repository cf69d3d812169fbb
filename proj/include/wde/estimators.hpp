#pragma once

#include <cmath>
#include <functional>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wde/coefficients.hpp"
#include "wde/grid.hpp"
#include "wde/sample.hpp"
#include "wde/wavelet.hpp"

namespace wde {

/// theta_{j,gamma} = |I|^{-1} sum_s Phi_{j,gamma}(Z(s)), scattered point by point.
CoeffMap empirical_father_coeffs(const Sample& sample, const WaveletBasis& basis, int j);

/// upsilon_{k,j,gamma}, 1 <= k <= 2^d - 1.
CoeffMap empirical_mother_coeffs(const Sample& sample, const WaveletBasis& basis, int k, int j);

/// All |M| families at level j in one pass; entry 0 is the father.
std::vector<CoeffMap> empirical_level_coeffs(const Sample& sample, const WaveletBasis& basis, int j);

/// Father coefficients at j0 and details at j0..j1-1.
CoefficientSet compute_coefficients(const Sample& sample, const WaveletBasis& basis, int j0, int j1);

enum class EstimateKind { Linear, Hard, Soft };

const char* to_string(EstimateKind kind) noexcept;

enum class ThresholdScope { PerLevel, Global };

/// An evaluable estimate. `coeffs` holds only the surviving (hard) or shrunk
/// (soft) details. When `mass` is set the estimate is the normalized
/// positive part max(f, 0) / mass.
struct DensityEstimate {
  WaveletBasis basis;
  EstimateKind kind = EstimateKind::Linear;
  int j0 = 0;
  int j1 = 0;
  std::vector<double> thresholds;  // hard: lambda_j for j = j0..j1-1
  double delta = 0.0;              // soft shrinkage
  CoefficientSet coeffs;
  std::optional<double> mass;

  bool normalized() const noexcept { return mass.has_value(); }
  double evaluate_raw(std::span<const double> x) const;
  double evaluate(std::span<const double> x) const;

  /// Bounding box of the union of supports of all stored terms.
  Box support_box() const;
};

DensityEstimate linear_estimate(const Sample& sample, const WaveletBasis& basis, int j);

/// Keeps upsilon with |upsilon| > thresholds[j - j0] (strict).
DensityEstimate hard_threshold_estimate(const Sample& sample, const WaveletBasis& basis, int j0, int j1,
                                        std::span<const double> thresholds);
DensityEstimate hard_threshold_estimate(const CoefficientSet& full, const WaveletBasis& basis, int j1,
                                        std::span<const double> thresholds);

/// lambda_j = multiple * max_{k,gamma} |upsilon_{k,j,gamma}| for j in [j_lo, j_hi); the
/// global scope takes the maximum over all those levels instead.
std::vector<double> relative_thresholds(const CoefficientSet& coeffs, double multiple, int j_lo, int j_hi,
                                        ThresholdScope scope = ThresholdScope::PerLevel);

/// sgn(u) (|u| - delta)_+ applied to every detail.
DensityEstimate soft_threshold_estimate(const Sample& sample, const WaveletBasis& basis, int j0, int j1,
                                        double delta);
DensityEstimate soft_threshold_estimate(const CoefficientSet& full, const WaveletBasis& basis, int j1,
                                        double delta);

inline double soft_shrink(double u, double delta) noexcept {
  const double m = std::abs(u) - delta;
  return m > 0.0 ? (u > 0.0 ? m : -m) : 0.0;
}

double evaluate(const DensityEstimate& est, std::span<const double> x);

/// Values at the grid nodes, row-major with the last axis fastest. Two
/// dimensional estimates use a separable sweep per (k, j) term.
std::vector<double> evaluate_grid(const DensityEstimate& est, const QuadratureGrid& grid);

using DensityFn = std::function<double(std::span<const double>)>;

/// <f, b_{k,j,gamma}> by midpoint quadrature over the support of the basis
/// function with `cells` nodes per axis.
double project_density(const DensityFn& f, const WaveletBasis& basis, int k, int j,
                       std::span<const int> gamma, int cells);

nlohmann::json to_json(const DensityEstimate& est);

void write_grid_csv(const std::string& path, const QuadratureGrid& grid, std::span<const double> values);

}  // namespace wde
