#include "wde/besov.hpp"

#include <algorithm>
#include <cmath>

#include "wde/error.hpp"

namespace wde {

namespace {

double lp_norm(const CoeffMap& m, double p) {
  if (std::isinf(p)) {
    double mx = 0.0;
    for (const auto& [g, v] : m) mx = std::max(mx, std::abs(v));
    return mx;
  }
  double acc = 0.0;
  for (const auto& [g, v] : m) acc += std::pow(std::abs(v), p);
  return std::pow(acc, 1.0 / p);
}

void check_index(double x, const char* what) {
  if (!(x >= 1.0)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must lie in [1, inf]");
}

}  // namespace

int robust_floor(double x) { return static_cast<int>(std::floor(x + 1e-9)); }

BesovNorm besov_seq_norm(const CoefficientSet& coeffs, const BesovParams& params, long long abs_det,
                         std::optional<int> truncation) {
  check_index(params.p, "p");
  check_index(params.q, "q");
  BesovNorm out;
  out.truncation = truncation.value_or(coeffs.fine_level() - 1);
  if (coeffs.empty()) {
    out.empty = true;
    return out;
  }
  const double inv_p = std::isinf(params.p) ? 0.0 : 1.0 / params.p;
  const double base = std::log(static_cast<double>(abs_det)) * (params.s + 0.5 - inv_p);
  double detail = 0.0;
  for (const auto& [j, per_k] : coeffs.detail) {
    if (j > out.truncation) break;
    const double weight = std::exp(base * j);
    for (const auto& m : per_k) {
      const double term = weight * lp_norm(m, params.p);
      if (std::isinf(params.q)) {
        detail = std::max(detail, term);
      } else {
        detail += std::pow(term, params.q);
      }
    }
  }
  if (!std::isinf(params.q)) detail = std::pow(detail, 1.0 / params.q);
  out.value = lp_norm(coeffs.father, params.p) + detail;
  return out;
}

double holder_embedding_s(double r, int d, const DilationMatrix& m) {
  if (!(r > 0.0 && r <= 1.0)) throw Error(ErrorCode::InvalidArgument, "Hoelder exponent must lie in (0, 1]");
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  return r * std::log(m.zeta_min()) / (d * std::log(m.zeta_max()));
}

RateExponents rate_exponents(double s, double p, double p_loss) {
  check_index(p, "p");
  check_index(p_loss, "p'");
  if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "smoothness must be positive");
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  const double inv_pl = std::isinf(p_loss) ? 0.0 : 1.0 / p_loss;
  RateExponents r;
  r.s_eff = s + std::min(inv_pl - inv_p, 0.0);
  r.eps = s * p - (p_loss - p) / 2.0;
  r.alpha = r.eps >= 0.0 ? s / (2.0 * s + 1.0) : r.s_eff / (2.0 * s + 1.0 - 2.0 * inv_p);
  return r;
}

RateParams rate_params(const BesovParams& bp, double p_loss, std::size_t cardinality, const DilationMatrix& m) {
  if (std::isinf(p_loss)) throw Error(ErrorCode::InvalidArgument, "rate parameters need a finite p'");
  if (!(bp.s > 1.0 / bp.p)) throw Error(ErrorCode::HypothesisViolation, "estimation needs s > 1/p");
  if (cardinality < 2) throw Error(ErrorCode::InvalidArgument, "need at least two observations");
  const RateExponents e = rate_exponents(bp.s, bp.p, p_loss);
  if (!(e.s_eff > 0.0)) throw Error(ErrorCode::HypothesisViolation, "effective smoothness must be positive");
  if (!(e.alpha < 0.5)) throw Error(ErrorCode::DegenerateConstant, "K0 is undefined for alpha >= 1/2");

  RateParams r;
  r.p_loss = p_loss;
  r.s_eff = e.s_eff;
  r.eps = e.eps;
  r.alpha = e.alpha;
  const double ln_m = std::log(static_cast<double>(m.abs_det()));
  const double ln_n = std::log(static_cast<double>(cardinality));
  r.j0 = std::max(0, robust_floor((1.0 - 2.0 * e.alpha) * ln_n / ln_m));
  r.j1 = std::max(r.j0, robust_floor(e.alpha / e.s_eff * ln_n / ln_m));
  r.K0 = std::sqrt(p_loss * ln_m / (1.0 - 2.0 * e.alpha));
  for (int j = r.j0; j < r.j1; ++j) {
    r.lambda_bar.push_back(r.K0 * std::sqrt(std::max(j, 1) / static_cast<double>(cardinality)));
  }
  return r;
}

int linear_level(double s_eff, std::size_t cardinality, long long abs_det) {
  if (!(s_eff > 0.0)) throw Error(ErrorCode::InvalidArgument, "effective smoothness must be positive");
  if (cardinality < 1 || abs_det < 2) throw Error(ErrorCode::InvalidArgument, "need |I| >= 1 and |M| >= 2");
  const double x = std::log(static_cast<double>(cardinality)) /
                   ((2.0 * s_eff + 1.0) * std::log(static_cast<double>(abs_det)));
  return std::max(0, robust_floor(x));
}

int differentiable_level(std::size_t cardinality, int d, const DilationMatrix& m, int offset) {
  if (cardinality < 1) throw Error(ErrorCode::InvalidArgument, "need |I| >= 1");
  const double denom = 2.0 * std::log(m.zeta_min()) + d * std::log(m.zeta_max());
  return offset + robust_floor(std::log(static_cast<double>(cardinality)) / denom);
}

}  // namespace wde
