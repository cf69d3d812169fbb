#include "wde/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

#include "wde/error.hpp"

namespace wde {

namespace {

bool inside(const Box& box, std::span<const double> x) {
  for (std::size_t i = 0; i < box.lo.size(); ++i) {
    if (!(x[i] >= box.lo[i] && x[i] < box.hi[i])) return false;
  }
  return true;
}

// Grid laid exactly on the box with about `cells_per_unit` cells per unit.
QuadratureGrid exact_grid(const Box& box, int cells_per_unit) {
  std::vector<int> cells;
  for (std::size_t i = 0; i < box.lo.size(); ++i) {
    cells.push_back(std::max(1, static_cast<int>(std::ceil((box.hi[i] - box.lo[i]) * cells_per_unit - 1e-9))));
  }
  return QuadratureGrid(box.lo, box.hi, std::move(cells));
}

}  // namespace

Box default_target_box() { return Box{{-0.5, -0.5}, {1.5, 1.5}}; }

int default_cells_per_unit(const DensityEstimate& est, int smooth_cells) {
  if (!est.basis.closed_form()) return smooth_cells;
  const int finest = std::max(est.coeffs.coarse_level, est.coeffs.fine_level());
  return 1 << std::max(1, finest + 1);
}

QuadratureGrid estimate_grid(const DensityEstimate& est, const Box& domain, int cells_per_unit) {
  return QuadratureGrid::aligned(box_union(est.support_box(), domain), cells_per_unit);
}

Normalized normalize(const DensityEstimate& est, const QuadratureGrid& grid) {
  if (est.normalized()) throw Error(ErrorCode::InvalidArgument, "estimate is already normalized");
  std::vector<double> values = evaluate_grid(est, grid);
  double mass = 0.0;
  for (double& v : values) {
    v = std::max(v, 0.0);
    mass += v;
  }
  mass *= grid.weight();
  if (!(mass > 1e-12)) throw Error(ErrorCode::DegenerateEstimate, "positive part of the estimate has no mass");
  const double inv = 1.0 / mass;
  for (double& v : values) v *= inv;
  Normalized out{est, mass, std::move(values)};
  out.estimate.mass = mass;
  return out;
}

double ise(const DensityEstimate& est, const DensityFn& target, const QuadratureGrid& grid) {
  const std::vector<double> values = evaluate_grid(est, grid);
  double acc = 0.0;
  for (std::size_t n = 0; n < values.size(); ++n) {
    const double e = values[n] - target(grid.point(n));
    acc += e * e;
  }
  return acc * grid.weight();
}

double ver_exact(const DensityEstimate& est, const DensityFn& target, const QuadratureGrid& grid) {
  const std::vector<double> values = evaluate_grid(est, grid);
  double acc = 0.0;
  for (std::size_t n = 0; n < values.size(); ++n) {
    acc += values[n] * values[n] - 2.0 * values[n] * target(grid.point(n));
  }
  return acc * grid.weight();
}

double l2_norm_sq(const DensityEstimate& est, const QuadratureGrid& grid) {
  if (!est.normalized()) return est.coeffs.sum_of_squares();
  double acc = 0.0;
  for (double v : evaluate_grid(est, grid)) acc += v * v;
  return acc * grid.weight();
}

double validation_mean(const DensityEstimate& est, const Sample& validation) {
  if (validation.empty()) throw Error(ErrorCode::EmptySample, "validation sample is empty");
  double acc = 0.0;
  for (std::size_t i = 0; i < validation.size(); ++i) acc += est.evaluate(validation.point(i));
  return acc / static_cast<double>(validation.size());
}

double ver_hat_from(double l2_sq, const DensityEstimate& est, const Sample& validation) {
  return l2_sq - 2.0 * validation_mean(est, validation);
}

double ver_hat(const DensityEstimate& est, const Sample& validation, const QuadratureGrid& grid) {
  if (validation.empty()) throw Error(ErrorCode::EmptySample, "validation sample is empty");
  return ver_hat_from(l2_norm_sq(est, grid), est, validation);
}

std::vector<Box> default_regions(const Box& domain, int splits) {
  if (splits < 1) throw Error(ErrorCode::InvalidArgument, "need at least one split per axis");
  const std::size_t d = domain.lo.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= static_cast<std::size_t>(splits);
  std::vector<Box> out;
  for (std::size_t flat = 0; flat < total; ++flat) {
    Box b{domain.lo, domain.hi};
    std::size_t rest = flat;
    for (std::size_t i = d; i-- > 0;) {
      const auto c = static_cast<double>(rest % static_cast<std::size_t>(splits));
      rest /= static_cast<std::size_t>(splits);
      const double w = (domain.hi[i] - domain.lo[i]) / splits;
      b.lo[i] = domain.lo[i] + c * w;
      b.hi[i] = domain.lo[i] + (c + 1.0) * w;
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<double> region_roughness(const Sample& pilot, const std::vector<Box>& regions, int j) {
  const WaveletBasis haar = tensor_basis(haar_filters(), pilot.dim());
  const std::vector<CoeffMap> level = empirical_level_coeffs(pilot, haar, j);
  std::vector<double> energy(regions.size(), 0.0);
  std::vector<double> centre(static_cast<std::size_t>(pilot.dim()));
  for (std::size_t k = 1; k < level.size(); ++k) {
    for (const auto& [g, v] : level[k]) {
      for (std::size_t i = 0; i < centre.size(); ++i) centre[i] = std::ldexp(g[i] + 0.5, -j);
      for (std::size_t r = 0; r < regions.size(); ++r) {
        if (inside(regions[r], centre)) {
          energy[r] += v * v;
          break;
        }
      }
    }
  }
  return energy;
}

PrimaryLevel select_primary_level(const Sample& train, const Sample& validation, const WaveletBasis& basis,
                                  const std::vector<Box>& regions, int j_lo, int j_hi, int smooth_cells) {
  if (regions.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one region");
  if (j_lo < 0 || j_lo > j_hi) throw Error(ErrorCode::InvalidLevels, "need 0 <= j_lo <= j_hi");
  if (validation.empty()) throw Error(ErrorCode::EmptySample, "validation sample is empty");
  const double inv_v = 1.0 / static_cast<double>(validation.size());
  PrimaryLevel out;
  out.criteria.assign(regions.size(), {});
  for (int j = j_lo; j <= j_hi; ++j) {
    const DensityEstimate est = linear_estimate(train, basis, j);
    const int cells = default_cells_per_unit(est, smooth_cells);
    for (std::size_t r = 0; r < regions.size(); ++r) {
      const QuadratureGrid grid = exact_grid(regions[r], cells);
      double sq = 0.0;
      for (double v : evaluate_grid(est, grid)) sq += v * v;
      sq *= grid.weight();
      double hits = 0.0;
      for (std::size_t i = 0; i < validation.size(); ++i) {
        const auto x = validation.point(i);
        if (inside(regions[r], x)) hits += est.evaluate(x);
      }
      out.criteria[r].push_back(sq - 2.0 * inv_v * hits);
    }
  }
  out.j_star = j_hi;
  for (const auto& crit : out.criteria) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < crit.size(); ++i) {
      if (crit[i] < crit[best] - 1e-12) best = i;
    }
    const int jk = j_lo + static_cast<int>(best);
    out.region_levels.push_back(jk);
    out.j_star = std::min(out.j_star, jk);
  }
  return out;
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

void VerReport::add(std::size_t sample_size, int j, const std::string& estimator, double threshold,
                    const std::vector<double>& values) {
  const auto [m, s] = mean_std(values);
  cells.push_back(VerCell{sample_size, j, estimator, threshold, m, s, values.size(), false});
}

void VerReport::mark_minima() {
  std::map<std::size_t, std::size_t> best;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    cells[i].is_min = false;
    const auto it = best.find(cells[i].sample_size);
    if (it == best.end() || cells[i].mean < cells[it->second].mean) best[cells[i].sample_size] = i;
  }
  for (const auto& [n, i] : best) cells[i].is_min = true;
}

const VerCell* VerReport::find(std::size_t sample_size, int j, const std::string& estimator, double threshold) const {
  for (const auto& c : cells) {
    if (c.sample_size == sample_size && c.j == j && c.estimator == estimator &&
        std::abs(c.threshold - threshold) < 1e-12) {
      return &c;
    }
  }
  return nullptr;
}

void VerReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  out << "sample_size,j,estimator,threshold,mean,std,is_min\n" << std::setprecision(10);
  for (const auto& c : cells) {
    out << c.sample_size << ',' << c.j << ',' << c.estimator << ',' << c.threshold << ',' << c.mean << ','
        << c.std << ',' << (c.is_min ? 1 : 0) << '\n';
  }
}

}  // namespace wde
