#include "wde/estimators.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>

#include "wde/error.hpp"

namespace wde {

namespace {

constexpr int kMaxTaps = 16;

// Translations gamma = base - m (m < L) whose support covers t = 2^j x on one
// axis, with the father and mother factor values at t - gamma.
struct AxisTaps {
  int base = 0;
  int count = 0;
  std::array<double, kMaxTaps> phi{};
  std::array<double, kMaxTaps> psi{};
};

AxisTaps axis_taps(const WaveletBasis& basis, double x, int j) {
  AxisTaps taps;
  const double t = std::ldexp(x, j);
  const double fl = std::floor(t);
  taps.base = static_cast<int>(fl);
  taps.count = basis.support();
  for (int m = 0; m < taps.count; ++m) {
    const double u = t - (fl - m);
    taps.phi[static_cast<std::size_t>(m)] = basis.phi(u);
    taps.psi[static_cast<std::size_t>(m)] = basis.psi(u);
  }
  return taps;
}

void check_basis(const WaveletBasis& basis) {
  if (basis.support() > kMaxTaps) throw Error(ErrorCode::Unsupported, "filter support too long");
}

void check_sample(const Sample& sample, const WaveletBasis& basis) {
  if (sample.empty()) throw Error(ErrorCode::EmptySample, "sample is empty");
  if (sample.dim() != basis.dim()) {
    throw Error(ErrorCode::InvalidArgument, "sample dimension does not match the basis");
  }
}

void check_level(int j) {
  if (j < 0) throw Error(ErrorCode::InvalidLevels, "levels must be nonnegative");
}

// Visits every (k, gamma) term touching x at level j for k in ks, passing the
// basis value 2^{jd/2} prod_i xi_{k_i}(2^j x_i - gamma_i).
template <typename Visit>
void for_each_term(const WaveletBasis& basis, std::span<const double> x, int j, std::span<const int> ks,
                   Visit&& visit) {
  const int d = basis.dim();
  std::array<AxisTaps, kMaxDim> taps;
  for (int i = 0; i < d; ++i) taps[static_cast<std::size_t>(i)] = axis_taps(basis, x[static_cast<std::size_t>(i)], j);
  const int L = basis.support();
  int combos = 1;
  for (int i = 0; i < d; ++i) combos *= L;
  const double scale = std::pow(2.0, 0.5 * j * d);
  std::array<int, kMaxDim> m{};
  Translation gamma{};
  for (int c = 0; c < combos; ++c) {
    int rest = c;
    for (int i = d - 1; i >= 0; --i) {
      const auto a = static_cast<std::size_t>(i);
      m[a] = rest % L;
      rest /= L;
      gamma[a] = taps[a].base - m[a];
    }
    for (int k : ks) {
      double v = scale;
      for (int i = 0; i < d; ++i) {
        const auto a = static_cast<std::size_t>(i);
        const auto& t = taps[a];
        v *= WaveletBasis::factor_of(k, i, d) == 0 ? t.phi[static_cast<std::size_t>(m[a])]
                                                   : t.psi[static_cast<std::size_t>(m[a])];
      }
      visit(k, gamma, v);
    }
  }
}

std::vector<CoeffMap> accumulate(const Sample& sample, const WaveletBasis& basis, int j, std::span<const int> ks) {
  check_basis(basis);
  check_sample(sample, basis);
  check_level(j);
  std::vector<CoeffMap> out(static_cast<std::size_t>(basis.num_mothers() + 1));
  for (std::size_t s = 0; s < sample.size(); ++s) {
    for_each_term(basis, sample.point(s), j, ks,
                  [&](int k, const Translation& g, double v) { out[static_cast<std::size_t>(k)][g] += v; });
  }
  const double inv = 1.0 / static_cast<double>(sample.size());
  for (auto& m : out) {
    for (auto& [g, v] : m) v *= inv;
  }
  return out;
}

std::vector<int> all_families(const WaveletBasis& basis) {
  std::vector<int> ks(static_cast<std::size_t>(basis.num_mothers() + 1));
  for (std::size_t k = 0; k < ks.size(); ++k) ks[k] = static_cast<int>(k);
  return ks;
}

std::vector<int> mother_families(const WaveletBasis& basis) {
  std::vector<int> ks;
  for (int k = 1; k <= basis.num_mothers(); ++k) ks.push_back(k);
  return ks;
}

double lookup(const CoeffMap& m, const Translation& g) {
  const auto it = m.find(g);
  return it == m.end() ? 0.0 : it->second;
}

void check_levels(int j0, int j1) {
  check_level(j0);
  if (j0 > j1) throw Error(ErrorCode::InvalidLevels, "need j0 <= j1");
}

DensityEstimate base_estimate(const CoefficientSet& full, const WaveletBasis& basis, EstimateKind kind, int j1) {
  check_levels(full.coarse_level, j1);
  for (int j = full.coarse_level; j < j1; ++j) {
    if (!full.detail.contains(j)) {
      throw Error(ErrorCode::InvalidLevels, "coefficient set lacks detail level " + std::to_string(j));
    }
  }
  DensityEstimate est{basis, kind, full.coarse_level, j1, {}, 0.0, {}, std::nullopt};
  est.coeffs.dim = full.dim;
  est.coeffs.coarse_level = full.coarse_level;
  est.coeffs.father = full.father;
  return est;
}

// Separable accumulation of one (k, j) term onto a 2-D grid:
// out(a, b) += 2^j sum_{g0, g1} c(g0, g1) xi0(2^j x_a - g0) xi1(2^j y_b - g1).
void add_term_2d(const WaveletBasis& basis, const CoeffMap& coeffs, int k, int j, const std::vector<double>& x0,
                 const std::vector<double>& x1, std::vector<double>& out) {
  if (coeffs.empty()) return;
  int lo0 = std::numeric_limits<int>::max(), hi0 = std::numeric_limits<int>::min();
  int lo1 = lo0, hi1 = hi0;
  for (const auto& [g, v] : coeffs) {
    lo0 = std::min(lo0, g[0]);
    hi0 = std::max(hi0, g[0]);
    lo1 = std::min(lo1, g[1]);
    hi1 = std::max(hi1, g[1]);
  }
  const int w0 = hi0 - lo0 + 1;
  const int w1 = hi1 - lo1 + 1;
  std::vector<double> c(static_cast<std::size_t>(w0) * static_cast<std::size_t>(w1), 0.0);
  for (const auto& [g, v] : coeffs) {
    c[static_cast<std::size_t>(g[0] - lo0) * static_cast<std::size_t>(w1) + static_cast<std::size_t>(g[1] - lo1)] = v;
  }

  const int L = basis.support();
  const int which0 = WaveletBasis::factor_of(k, 0, 2);
  const int which1 = WaveletBasis::factor_of(k, 1, 2);
  auto taps_for = [&](const std::vector<double>& nodes, int which, int lo, int w, std::vector<int>& idx,
                      std::vector<double>& val) {
    idx.assign(nodes.size() * static_cast<std::size_t>(L), -1);
    val.assign(nodes.size() * static_cast<std::size_t>(L), 0.0);
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const AxisTaps t = axis_taps(basis, nodes[n], j);
      for (int m = 0; m < L; ++m) {
        const int g = t.base - m - lo;
        if (g < 0 || g >= w) continue;
        const std::size_t at = n * static_cast<std::size_t>(L) + static_cast<std::size_t>(m);
        idx[at] = g;
        val[at] = which == 0 ? t.phi[static_cast<std::size_t>(m)] : t.psi[static_cast<std::size_t>(m)];
      }
    }
  };
  std::vector<int> idx0, idx1;
  std::vector<double> val0, val1;
  taps_for(x0, which0, lo0, w0, idx0, val0);
  taps_for(x1, which1, lo1, w1, idx1, val1);

  const std::size_t n0 = x0.size(), n1 = x1.size();
  std::vector<double> t(static_cast<std::size_t>(w0) * n1, 0.0);
  for (int r = 0; r < w0; ++r) {
    const double* crow = c.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(w1);
    double* trow = t.data() + static_cast<std::size_t>(r) * n1;
    for (std::size_t b = 0; b < n1; ++b) {
      double acc = 0.0;
      for (int m = 0; m < L; ++m) {
        const std::size_t at = b * static_cast<std::size_t>(L) + static_cast<std::size_t>(m);
        if (idx1[at] >= 0) acc += crow[idx1[at]] * val1[at];
      }
      trow[b] = acc;
    }
  }
  const double scale = std::pow(2.0, static_cast<double>(j));
  for (std::size_t a = 0; a < n0; ++a) {
    double* orow = out.data() + a * n1;
    for (int m = 0; m < L; ++m) {
      const std::size_t at = a * static_cast<std::size_t>(L) + static_cast<std::size_t>(m);
      if (idx0[at] < 0 || val0[at] == 0.0) continue;
      const double s = scale * val0[at];
      const double* trow = t.data() + static_cast<std::size_t>(idx0[at]) * n1;
      for (std::size_t b = 0; b < n1; ++b) orow[b] += s * trow[b];
    }
  }
}

}  // namespace

CoeffMap empirical_father_coeffs(const Sample& sample, const WaveletBasis& basis, int j) {
  const int ks[] = {0};
  return std::move(accumulate(sample, basis, j, ks)[0]);
}

CoeffMap empirical_mother_coeffs(const Sample& sample, const WaveletBasis& basis, int k, int j) {
  if (k < 1 || k > basis.num_mothers()) throw Error(ErrorCode::InvalidIndex, "mother index out of range");
  const int ks[] = {k};
  return std::move(accumulate(sample, basis, j, ks)[static_cast<std::size_t>(k)]);
}

std::vector<CoeffMap> empirical_level_coeffs(const Sample& sample, const WaveletBasis& basis, int j) {
  return accumulate(sample, basis, j, all_families(basis));
}

CoefficientSet compute_coefficients(const Sample& sample, const WaveletBasis& basis, int j0, int j1) {
  check_levels(j0, j1);
  CoefficientSet set;
  set.dim = basis.dim();
  set.coarse_level = j0;
  if (j1 == j0) {
    set.father = empirical_father_coeffs(sample, basis, j0);
    return set;
  }
  for (int j = j0; j < j1; ++j) {
    std::vector<CoeffMap> level = j == j0 ? empirical_level_coeffs(sample, basis, j)
                                          : accumulate(sample, basis, j, mother_families(basis));
    if (j == j0) set.father = std::move(level[0]);
    set.detail[j] = std::vector<CoeffMap>(std::make_move_iterator(level.begin() + 1),
                                          std::make_move_iterator(level.end()));
  }
  return set;
}

const char* to_string(EstimateKind kind) noexcept {
  switch (kind) {
    case EstimateKind::Linear: return "linear";
    case EstimateKind::Hard: return "hard";
    case EstimateKind::Soft: return "soft";
  }
  return "unknown";
}

double DensityEstimate::evaluate_raw(std::span<const double> x) const {
  double acc = 0.0;
  const int father_only[] = {0};
  for_each_term(basis, x, coeffs.coarse_level, father_only,
                [&](int, const Translation& g, double v) { acc += lookup(coeffs.father, g) * v; });
  const std::vector<int> mothers = mother_families(basis);
  for (const auto& [j, per_k] : coeffs.detail) {
    for_each_term(basis, x, j, mothers, [&](int k, const Translation& g, double v) {
      acc += lookup(per_k[static_cast<std::size_t>(k - 1)], g) * v;
    });
  }
  return acc;
}

double DensityEstimate::evaluate(std::span<const double> x) const {
  const double raw = evaluate_raw(x);
  if (!mass) return raw;
  return raw > 0.0 ? raw / *mass : 0.0;
}

Box DensityEstimate::support_box() const {
  const int d = basis.dim();
  const int L = basis.support();
  Box box;
  auto absorb = [&](const CoeffMap& m, int j) {
    for (const auto& [g, v] : m) {
      if (box.lo.empty()) {
        box.lo.assign(static_cast<std::size_t>(d), std::numeric_limits<double>::infinity());
        box.hi.assign(static_cast<std::size_t>(d), -std::numeric_limits<double>::infinity());
      }
      for (int i = 0; i < d; ++i) {
        const auto a = static_cast<std::size_t>(i);
        box.lo[a] = std::min(box.lo[a], std::ldexp(g[a], -j));
        box.hi[a] = std::max(box.hi[a], std::ldexp(g[a] + L, -j));
      }
    }
  };
  absorb(coeffs.father, coeffs.coarse_level);
  for (const auto& [j, per_k] : coeffs.detail) {
    for (const auto& m : per_k) absorb(m, j);
  }
  return box;
}

DensityEstimate linear_estimate(const Sample& sample, const WaveletBasis& basis, int j) {
  CoefficientSet set = compute_coefficients(sample, basis, j, j);
  return DensityEstimate{basis, EstimateKind::Linear, j, j, {}, 0.0, std::move(set), std::nullopt};
}

DensityEstimate hard_threshold_estimate(const CoefficientSet& full, const WaveletBasis& basis, int j1,
                                        std::span<const double> thresholds) {
  DensityEstimate est = base_estimate(full, basis, EstimateKind::Hard, j1);
  if (thresholds.size() != static_cast<std::size_t>(j1 - est.j0)) {
    throw Error(ErrorCode::InvalidArgument, "need one threshold per detail level");
  }
  for (double t : thresholds) {
    if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "thresholds must be nonnegative");
  }
  est.thresholds.assign(thresholds.begin(), thresholds.end());
  for (int j = est.j0; j < j1; ++j) {
    const double lambda = thresholds[static_cast<std::size_t>(j - est.j0)];
    auto& kept = est.coeffs.detail[j];
    kept.resize(static_cast<std::size_t>(basis.num_mothers()));
    const auto& src = full.detail.at(j);
    for (std::size_t k = 0; k < src.size(); ++k) {
      for (const auto& [g, v] : src[k]) {
        if (std::abs(v) > lambda) kept[k].emplace(g, v);
      }
    }
  }
  return est;
}

DensityEstimate hard_threshold_estimate(const Sample& sample, const WaveletBasis& basis, int j0, int j1,
                                        std::span<const double> thresholds) {
  return hard_threshold_estimate(compute_coefficients(sample, basis, j0, j1), basis, j1, thresholds);
}

std::vector<double> relative_thresholds(const CoefficientSet& coeffs, double multiple, int j_lo, int j_hi,
                                        ThresholdScope scope) {
  if (!(multiple >= 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold multiple must be nonnegative");
  if (j_lo > j_hi) throw Error(ErrorCode::InvalidLevels, "need j_lo <= j_hi");
  std::vector<double> level_max;
  for (int j = j_lo; j < j_hi; ++j) {
    double mx = 0.0;
    const auto it = coeffs.detail.find(j);
    if (it != coeffs.detail.end()) {
      for (const auto& m : it->second) {
        for (const auto& [g, v] : m) mx = std::max(mx, std::abs(v));
      }
    }
    level_max.push_back(mx);
  }
  if (scope == ThresholdScope::Global && !level_max.empty()) {
    const double mx = *std::max_element(level_max.begin(), level_max.end());
    std::fill(level_max.begin(), level_max.end(), mx);
  }
  for (double& t : level_max) t = std::isinf(multiple) ? multiple : t * multiple;
  return level_max;
}

DensityEstimate soft_threshold_estimate(const CoefficientSet& full, const WaveletBasis& basis, int j1,
                                        double delta) {
  if (!(delta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "shrinkage must be nonnegative");
  DensityEstimate est = base_estimate(full, basis, EstimateKind::Soft, j1);
  est.delta = delta;
  for (int j = est.j0; j < j1; ++j) {
    auto& kept = est.coeffs.detail[j];
    kept.resize(static_cast<std::size_t>(basis.num_mothers()));
    const auto& src = full.detail.at(j);
    for (std::size_t k = 0; k < src.size(); ++k) {
      for (const auto& [g, v] : src[k]) {
        const double s = soft_shrink(v, delta);
        if (s != 0.0) kept[k].emplace(g, s);
      }
    }
  }
  return est;
}

DensityEstimate soft_threshold_estimate(const Sample& sample, const WaveletBasis& basis, int j0, int j1,
                                        double delta) {
  return soft_threshold_estimate(compute_coefficients(sample, basis, j0, j1), basis, j1, delta);
}

double evaluate(const DensityEstimate& est, std::span<const double> x) { return est.evaluate(x); }

std::vector<double> evaluate_grid(const DensityEstimate& est, const QuadratureGrid& grid) {
  if (grid.dim() != est.basis.dim()) {
    throw Error(ErrorCode::InvalidArgument, "grid dimension does not match the estimate");
  }
  std::vector<double> out(grid.size(), 0.0);
  if (grid.dim() == 2) {
    const std::vector<double> x0 = grid.nodes(0);
    const std::vector<double> x1 = grid.nodes(1);
    add_term_2d(est.basis, est.coeffs.father, 0, est.coeffs.coarse_level, x0, x1, out);
    for (const auto& [j, per_k] : est.coeffs.detail) {
      for (std::size_t k = 0; k < per_k.size(); ++k) {
        add_term_2d(est.basis, per_k[k], static_cast<int>(k + 1), j, x0, x1, out);
      }
    }
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = est.evaluate_raw(grid.point(i));
  }
  if (est.mass) {
    const double inv = 1.0 / *est.mass;
    for (double& v : out) v = v > 0.0 ? v * inv : 0.0;
  }
  return out;
}

double project_density(const DensityFn& f, const WaveletBasis& basis, int k, int j, std::span<const int> gamma,
                       int cells) {
  const int d = basis.dim();
  std::vector<double> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    const auto a = static_cast<std::size_t>(i);
    lo[a] = std::ldexp(gamma[a], -j);
    hi[a] = std::ldexp(gamma[a] + basis.support(), -j);
  }
  const QuadratureGrid grid(lo, hi, std::vector<int>(static_cast<std::size_t>(d), cells));
  double acc = 0.0;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const std::vector<double> x = grid.point(n);
    acc += f(x) * basis.eval(k, j, gamma, x);
  }
  return acc * grid.weight();
}

nlohmann::json to_json(const DensityEstimate& est) {
  using nlohmann::json;
  const int d = est.basis.dim();
  json j;
  j["basis"] = {{"wavelet", est.basis.name()},
                {"dim", d},
                {"support", est.basis.support()},
                {"dilation", "2I"},
                {"cascade_depth", est.basis.table() ? est.basis.table()->depth() : 0}};
  j["kind"] = to_string(est.kind);
  j["j0"] = est.j0;
  j["j1"] = est.j1;
  j["thresholds"] = est.thresholds;
  j["delta"] = est.delta;
  j["normalization_mass"] = est.mass ? json(*est.mass) : json(nullptr);
  json coeffs = json::array();
  for (const auto& [g, v] : sorted_entries(est.coeffs.father)) {
    coeffs.push_back({{"k", 0}, {"j", est.coeffs.coarse_level}, {"gamma", translation_vector(g, d)}, {"value", v}});
  }
  for (const auto& [lev, per_k] : est.coeffs.detail) {
    for (std::size_t k = 0; k < per_k.size(); ++k) {
      for (const auto& [g, v] : sorted_entries(per_k[k])) {
        coeffs.push_back({{"k", k + 1}, {"j", lev}, {"gamma", translation_vector(g, d)}, {"value", v}});
      }
    }
  }
  j["coefficients"] = std::move(coeffs);
  return j;
}

void write_grid_csv(const std::string& path, const QuadratureGrid& grid, std::span<const double> values) {
  if (values.size() != grid.size()) throw Error(ErrorCode::InvalidArgument, "grid values have the wrong length");
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  for (int i = 0; i < grid.dim(); ++i) out << 'x' << (i + 1) << ',';
  out << "value\n" << std::setprecision(12);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    for (double c : grid.point(n)) out << c << ',';
    out << values[n] << '\n';
  }
}

}  // namespace wde
