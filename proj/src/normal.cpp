#include "wde/normal.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "wde/error.hpp"

namespace wde {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidShape: return "invalid-shape";
    case ErrorCode::OutOfRange: return "out-of-range";
    case ErrorCode::UnsupportedLattice: return "unsupported-lattice";
    case ErrorCode::DegenerateSplit: return "degenerate-split";
    case ErrorCode::BipartiteViolation: return "bipartite-assumption-violation";
    case ErrorCode::NonInvertible: return "non-invertible";
    case ErrorCode::DecompositionFailure: return "decomposition-failure";
    case ErrorCode::InvalidCorrelation: return "invalid-correlation";
    case ErrorCode::InvalidIndex: return "invalid-index";
    case ErrorCode::InvalidLevels: return "invalid-levels";
    case ErrorCode::EmptySample: return "empty-sample";
    case ErrorCode::HypothesisViolation: return "hypothesis-violation";
    case ErrorCode::DegenerateConstant: return "degenerate-constant";
    case ErrorCode::DegenerateEstimate: return "degenerate-estimate";
    case ErrorCode::Unsupported: return "unsupported-feature";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::Parse: return "parse-error";
  }
  return "unknown";
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "normal quantile needs u in (0, 1)");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double ks_statistic_normal(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf(sorted[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value(std::size_t n, double alpha) {
  double c = 0.0;
  if (std::abs(alpha - 0.10) < 1e-12) c = 1.22385;
  else if (std::abs(alpha - 0.05) < 1e-12) c = 1.35810;
  else if (std::abs(alpha - 0.01) < 1e-12) c = 1.62762;
  else throw Error(ErrorCode::InvalidArgument, "unsupported KS level");
  const double sn = std::sqrt(static_cast<double>(n));
  // Stephens' small-sample correction.
  return c / (sn + 0.12 + 0.11 / sn);
}

double correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "correlation needs two equally long sequences");
  }
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace wde
