#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "wde/besov.hpp"
#include "wde/densities.hpp"
#include "wde/error.hpp"
#include "wde/estimators.hpp"
#include "wde/experiment.hpp"
#include "wde/gmrf.hpp"
#include "wde/normal.hpp"
#include "wde/postprocess.hpp"

namespace {

using namespace wde;
using Clock = std::chrono::steady_clock;

int failures = 0;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void verdict(int id, bool pass, const std::string& detail) {
  std::printf("%s %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  failures += !pass;
}

void info(const std::string& line) {
  std::printf("  %s\n", line.c_str());
  std::fflush(stdout);
}

template <typename... Args>
std::string format(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Sample mixture_sample(int side, std::uint64_t seed) {
  Rng rng(seed);
  return transform_to_target(sample_independent(square_lattice(side), default_copula_correlation(), rng));
}

std::vector<std::vector<double>> probe_points(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.6, 1.6);
  std::vector<std::vector<double>> out;
  for (int i = 0; i < n; ++i) out.push_back({u(rng), u(rng)});
  return out;
}

double max_gap(const DensityEstimate& a, const DensityEstimate& b) {
  double worst = 0.0;
  for (const auto& x : probe_points(400, 3)) worst = std::max(worst, std::abs(evaluate(a, x) - evaluate(b, x)));
  const QuadratureGrid grid = estimate_grid(a, default_target_box(), 32);
  const auto va = evaluate_grid(a, grid);
  const auto vb = evaluate_grid(b, grid);
  for (std::size_t i = 0; i < va.size(); ++i) worst = std::max(worst, std::abs(va[i] - vb[i]));
  return worst;
}

void orthonormality() {
  const auto t0 = Clock::now();
  auto all_pairs = [](const std::vector<BasisIndex>& idx) {
    std::vector<std::pair<BasisIndex, BasisIndex>> pairs;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = a; b < idx.size(); ++b) pairs.emplace_back(idx[a], idx[b]);
    }
    return pairs;
  };
  // Fathers at the coarse level j0 plus mothers at every level >= j0 form
  // an orthonormal system; j0 = 0 and j0 = 1 are checked separately.
  auto system = [](int d, int j0, int k_count, int lo_pad, int hi_pad) {
    std::vector<BasisIndex> idx;
    for (int j = j0; j <= 1; ++j) {
      for (int k = (j == j0 ? 0 : 1); k < k_count; ++k) {
        const int hi = (1 << j) + hi_pad;
        if (d == 1) {
          for (int g = -lo_pad; g <= hi; ++g) idx.push_back({k, j, {g}});
        } else {
          for (int g1 = -lo_pad; g1 <= hi; ++g1) {
            for (int g2 = -lo_pad; g2 <= hi; ++g2) idx.push_back({k, j, {g1, g2}});
          }
        }
      }
    }
    return idx;
  };
  const WaveletBasis haar_basis = tensor_basis(haar_filters(), 2);
  const WaveletBasis d4_basis = tensor_basis(daubechies4_filters(), 1, 12);
  double haar = 0.0, d4 = 0.0;
  std::size_t haar_pairs = 0, d4_pairs = 0;
  for (int j0 : {0, 1}) {
    const auto hp = all_pairs(system(2, j0, 4, 1, 0));
    const auto dp = all_pairs(system(1, j0, 2, 3, 2));
    haar = std::max(haar, orthonormality_report(haar_basis, hp, 64));
    d4 = std::max(d4, orthonormality_report(d4_basis, dp, 4096));
    haar_pairs += hp.size();
    d4_pairs += dp.size();
  }
  const double secs = seconds_since(t0);
  verdict(1, haar == 0.0 && d4 < 1e-4 && secs < 5.0,
          format("haar d=2 max residual %.3g over %zu pairs (need 0); d4 d=1 %.3g over %zu pairs (need < 1e-4); %.2f s",
                 haar, haar_pairs, d4, d4_pairs, secs));
}

void coefficient_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-0.3, 1.3);
  std::vector<double> c(400);
  for (double& x : c) x = u(rng);
  const Sample s(2, c);
  double worst = 0.0;
  int checked = 0;
  for (const char* name : {"haar", "d4"}) {
    const WaveletBasis b = basis_by_name(name, 2);
    std::vector<std::vector<CoeffMap>> levels;
    for (int j = 0; j <= 3; ++j) levels.push_back(empirical_level_coeffs(s, b, j));
    for (int trial = 0; trial < 50; ++trial) {
      const int j = static_cast<int>(rng() % 4);
      const int k = static_cast<int>(rng() % 4);
      const int span = (1 << j) + b.support();
      const std::vector<int> g{static_cast<int>(rng() % span) - b.support(),
                               static_cast<int>(rng() % span) - b.support()};
      const auto& m = levels[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
      const auto it = m.find(make_translation(g));
      const double fast = it == m.end() ? 0.0 : it->second;
      double brute = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) brute += b.eval(k, j, g, s.point(i));
      brute /= static_cast<double>(s.size());
      worst = std::max(worst, std::abs(fast - brute));
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  verdict(2, worst <= 1e-12 && secs < 5.0,
          format("%d coefficients (haar and d4, 200 points): max |accumulated - brute force| = %.3g; %.2f s", checked,
                 worst, secs));
}

void ise_identity() {
  struct Case {
    const char* name;
    DensityFn f;
    double norm_sq;
  };
  const std::vector<Case> cases{
      {"uniform", [](std::span<const double> x) {
         return (x[0] >= 0.0 && x[0] < 1.0 && x[1] >= 0.0 && x[1] < 1.0) ? 1.0 : 0.0;
       }, 1.0},
      {"ramp", [](std::span<const double> x) { return ramp_pdf(x); }, kRampL2NormSq},
      {"mixture", [](std::span<const double> x) { return target_pdf(x, 0.1); }, target_l2_norm_sq(0.1)},
  };
  const DensityEstimate est = linear_estimate(mixture_sample(20, 7), tensor_basis(haar_filters(), 2), 2);
  const QuadratureGrid grid = estimate_grid(est, default_target_box(), 1024);
  double worst = 0.0;
  std::string detail;
  for (const auto& c : cases) {
    const double gap = std::abs(ise(est, c.f, grid) - (ver_exact(est, c.f, grid) + c.norm_sq));
    worst = std::max(worst, gap);
    detail += format("%s %.2g; ", c.name, gap);
  }
  verdict(3, worst < 1e-6, "|ise - (ver + ||f||^2)|: " + detail + "need < 1e-6");
}

void hard_degeneration() {
  const WaveletBasis haar = tensor_basis(haar_filters(), 2);
  const double inf = std::numeric_limits<double>::infinity();
  double zero_gap = 0.0, inf_gap = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const Sample s = mixture_sample(15, 900 + rep);
    const CoefficientSet full = compute_coefficients(s, haar, 0, 3);
    zero_gap = std::max(zero_gap, max_gap(hard_threshold_estimate(full, haar, 3, relative_thresholds(full, 0.0, 0, 3)),
                                          linear_estimate(s, haar, 3)));
    inf_gap = std::max(inf_gap, max_gap(hard_threshold_estimate(full, haar, 3, relative_thresholds(full, inf, 0, 3)),
                                        linear_estimate(s, haar, 0)));
  }
  verdict(4, zero_gap <= 1e-12 && inf_gap == 0.0,
          format("haar, 10 samples: multiple=0 vs linear j1 max gap %.3g (need <= 1e-12); multiple=inf vs linear j0 %.3g "
                 "(need 0)",
                 zero_gap, inf_gap));
  const WaveletBasis d4 = tensor_basis(daubechies4_filters(), 2);
  const Sample s = mixture_sample(15, 900);
  const CoefficientSet full = compute_coefficients(s, d4, 0, 3);
  info(format("d4 (tabulated factors, depth 12): multiple=0 gap %.3g, multiple=inf gap %.3g",
              max_gap(hard_threshold_estimate(full, d4, 3, relative_thresholds(full, 0.0, 0, 3)),
                      linear_estimate(s, d4, 3)),
              max_gap(hard_threshold_estimate(full, d4, 3, relative_thresholds(full, inf, 0, 3)),
                      linear_estimate(s, d4, 0))));
}

const VerReport& report_for(const std::vector<VerReport>& reports, const std::string& wavelet,
                            const std::string& variant) {
  for (const auto& r : reports) {
    if (r.wavelet == wavelet && r.variant == variant) return r;
  }
  throw Error(ErrorCode::InvalidArgument, "missing report " + wavelet + "/" + variant);
}

ExperimentConfig table_config(bool iid) {
  ExperimentConfig c;
  c.sizes = {20, 35};
  c.reps = 100;
  c.iid = iid;
  return c;
}

void table_reproduction(const TableResult& mcmc) {
  struct Target {
    const char* wavelet;
    std::size_t n;
    const char* estimator;
    double threshold;
    double value;
    double tol;
  };
  const std::vector<Target> targets{
      {"haar", 400, "linear", 0.0, -1.026, 0.05}, {"haar", 1225, "linear", 0.0, -1.052, 0.05},
      {"d4", 400, "hard", 0.1, -1.166, 0.06},     {"d4", 1225, "hard", 0.1, -1.194, 0.06},
  };
  std::string primary = "raw";
  double best = std::numeric_limits<double>::infinity();
  for (const char* variant : {"raw", "normalized"}) {
    double dev = 0.0;
    std::string line = std::string(variant) + ":";
    for (const auto& t : targets) {
      const VerCell* cell = report_for(mcmc.reports, t.wavelet, variant).find(t.n, 2, t.estimator, t.threshold);
      dev += std::abs(cell->mean - t.value);
      line += format(" %s %s n=%zu j=2 %.3f (target %.3f);", t.wavelet, t.estimator, t.n, cell->mean, t.value);
    }
    info(line);
    if (dev < best) best = dev, primary = variant;
  }
  bool within = true;
  std::string detail = "variant " + primary + ":";
  for (const auto& t : targets) {
    const VerCell* cell = report_for(mcmc.reports, t.wavelet, primary).find(t.n, 2, t.estimator, t.threshold);
    const bool ok = std::abs(cell->mean - t.value) <= t.tol;
    within = within && ok;
    detail += format(" %s/%s n=%zu %+.3f%s;", t.wavelet, t.estimator, t.n, cell->mean - t.value, ok ? "" : " (out)");
  }
  bool argmin = true;
  for (const char* wavelet : {"haar", "d4"}) {
    for (const auto& cell : report_for(mcmc.reports, wavelet, primary).cells) {
      if (!cell.is_min) continue;
      argmin = argmin && cell.j == 2;
      detail += format(" argmin %s n=%zu: %s j=%d;", wavelet, cell.sample_size, cell.estimator.c_str(), cell.j);
    }
  }
  verdict(5, within && argmin, detail + format(" %.0f s", mcmc.seconds));
}

void dependent_vs_independent(const TableResult& mcmc, const TableResult& iid) {
  int cells = 0, violations = 0;
  double worst_z = 0.0;
  std::string worst;
  for (const auto& rm : mcmc.reports) {
    const VerReport& ri = report_for(iid.reports, rm.wavelet, rm.variant);
    for (const auto& a : rm.cells) {
      const VerCell* b = ri.find(a.sample_size, a.j, a.estimator, a.threshold);
      if (!b) throw Error(ErrorCode::InvalidArgument, "iid table lacks a cell");
      const double se = std::sqrt(a.std * a.std / static_cast<double>(a.reps) + b->std * b->std / static_cast<double>(b->reps));
      const double z = std::abs(a.mean - b->mean) / se;
      ++cells;
      violations += !(z < 2.0);
      if (z > worst_z) {
        worst_z = z;
        worst = format("%s/%s n=%zu %s j=%d mult=%.1f", rm.wavelet.c_str(), rm.variant.c_str(), a.sample_size,
                       a.estimator.c_str(), a.j, a.threshold);
      }
    }
  }
  verdict(6, violations == 0,
          format("%d of %d cells differ by >= 2 pooled SE; largest %.2f SE at ", violations, cells, worst_z) + worst);
}

void sampler_calibration() {
  const auto t0 = Clock::now();
  ExperimentConfig c;
  const MultiField f = simulate_fields(c, 50, 0);
  const double crit = ks_critical_value(2500, 0.01);
  bool ks_ok = true;
  std::string detail = format("KS at n=2500 after %d sweeps, 1%% critical %.4f:", c.iterations, crit);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    const double d = ks_statistic_normal(f.values[i]);
    ks_ok = ks_ok && d < crit;
    detail += format(" Z%zu %.4f", i + 1, d);
  }
  const std::array<double, kFieldComponents> zero{};
  const LatticeShape shape = square_lattice(50);
  const Eigen::MatrixXd r = default_copula_correlation();
  Rng init(11);
  const MultiField chain = run_chain(make_multifield(shape, zero, r, init), 1, std::uint64_t{77});
  Rng rng(77);
  const bool bitwise = chain.values == sample_independent(shape, r, rng).values;
  verdict(7, ks_ok && bitwise,
          detail + format("; eta=0 sweep bitwise equal to iid sampler: %s; %.1f s", bitwise ? "yes" : "no",
                          seconds_since(t0)));
}

void rate_property() {
  ExperimentConfig c;
  c.sizes = {20, 35, 50, 65};
  c.reps = 100;
  const auto t0 = Clock::now();
  const RateResult r = run_rates(c, false);
  bool decreasing = true;
  std::string detail = "linear mean ISE:";
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    const auto& p = r.points[i];
    if (i > 0) decreasing = decreasing && p.linear_mean < r.points[i - 1].linear_mean;
    detail += format(" n=%zu j=%d %.4f;", p.sample_size, p.linear_level, p.linear_mean);
    info(format("n=%zu linear j=%d ISE %.5f (se %.5f); hard j0=%d j1=%d ISE %.5f (se %.5f)", p.sample_size,
                p.linear_level, p.linear_mean, p.linear_se, p.j0, p.j1, p.hard_mean, p.hard_se));
  }
  const bool slope_ok = std::abs(r.linear_slope - r.predicted_slope) <= 0.3 * std::abs(r.predicted_slope);
  verdict(8, decreasing && slope_ok,
          detail + format(" slope %.3f vs predicted %.3f (s'=%.2f, +-30%%); hard slope %.3f; %.0f s", r.linear_slope,
                          r.predicted_slope, r.s_eff, r.hard_slope, seconds_since(t0)));
}

void normalization() {
  const auto t0 = Clock::now();
  ExperimentConfig c;
  const WaveletBasis d4 = basis_by_name("d4", 2, c.cascade_depth);
  double min_value = std::numeric_limits<double>::infinity();
  double worst_mass = 0.0;
  std::vector<double> mean_dev;
  for (int side : {50, 20}) {
    std::vector<double> dev(static_cast<std::size_t>(c.reps));
    std::vector<double> mins(dev.size()), mass_err(dev.size());
    parallel_for(c.reps, c.workers, [&](int rep) {
      const DensityEstimate est = linear_estimate(simulate_sample(c, side, rep), d4, 3);
      const QuadratureGrid grid = estimate_grid(est, default_target_box(), default_cells_per_unit(est, c.smooth_cells));
      const Normalized n = normalize(est, grid);
      double total = 0.0;
      for (double v : n.values) total += v;
      const auto i = static_cast<std::size_t>(rep);
      mins[i] = *std::min_element(n.values.begin(), n.values.end());
      mass_err[i] = std::abs(total * grid.weight() - 1.0);
      dev[i] = std::abs(n.mass - 1.0);
    });
    min_value = std::min(min_value, *std::min_element(mins.begin(), mins.end()));
    worst_mass = std::max(worst_mass, *std::max_element(mass_err.begin(), mass_err.end()));
    mean_dev.push_back(mean_std(dev).first);
  }
  verdict(9, min_value >= 0.0 && worst_mass < 1e-8 && mean_dev[0] <= mean_dev[1],
          format("d4 linear j=3, %d reps: min value %.3g, max |int - 1| %.3g; mean |S-1| n=2500 %.4f vs n=400 %.4f; "
                 "%.0f s",
                 c.reps, min_value, worst_mass, mean_dev[0], mean_dev[1], seconds_since(t0)));
}

void rate_formulas() {
  const RateParams w = rate_params({1.0, 2.0, 2.0, 1.0}, 2.0, 4096, DilationMatrix::isotropic(2));
  const bool worked = w.eps == 2.0 && w.alpha == 1.0 / 3.0;
  double continuity = 0.0;
  for (double s : {0.75, 1.0, 2.0}) {
    for (double p : {1.5, 2.0, 4.0}) {
      const double pl = p * (1.0 + 2.0 * s);
      const double sp = s + 1.0 / pl - 1.0 / p;
      continuity = std::max(continuity, std::abs(sp / (2.0 * s + 1.0 - 2.0 / p) - s / (2.0 * s + 1.0)));
      continuity = std::max(continuity, std::abs(rate_exponents(s, p, pl * (1.0 + 1e-9)).alpha -
                                                 rate_exponents(s, p, pl * (1.0 - 1e-9)).alpha));
    }
  }
  int grid = 0, beat = 0;
  for (double s = 0.6; s <= 3.0 + 1e-9; s += 0.3) {
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      if (!(s > 1.0 / p)) continue;
      for (double pl : {p + 0.5, p + 1.0, 2.0 * p, 4.0 * p, 10.0 * p}) {
        const RateExponents e = rate_exponents(s, p, pl);
        ++grid;
        beat += e.alpha > e.s_eff / (2.0 * e.s_eff + 1.0);
      }
    }
  }
  verdict(10, worked && continuity < 1e-8 && beat == grid,
          format("s=1,p=p'=2: eps=%g alpha=%.17g; branch gap at eps=0 %.2g; alpha > s'/(2s'+1) on %d of %d grid points",
                 w.eps, w.alpha, continuity, beat, grid));
}

}  // namespace

int main() {
  try {
    orthonormality();
    coefficient_oracle();
    ise_identity();
    hard_degeneration();
    const TableResult mcmc = run_table(table_config(false), false);
    table_reproduction(mcmc);
    const TableResult iid = run_table(table_config(true), false);
    dependent_vs_independent(mcmc, iid);
    sampler_calibration();
    rate_property();
    normalization();
    rate_formulas();
  } catch (const std::exception& e) {
    std::printf("FAIL: aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
