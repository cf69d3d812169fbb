#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "wde/coefficients.hpp"
#include "wde/wavelet.hpp"

namespace wde {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Smoothness s and integrability p, q of B^s_{p,q}; K bounds the norm of
/// the density class. p or q may be kInf.
struct BesovParams {
  double s = 1.0;
  double p = 2.0;
  double q = 2.0;
  double K = 1.0;
};

struct BesovNorm {
  double value = 0.0;
  int truncation = 0;  // finest detail level included
  bool empty = false;  // no coefficients: value is zero
};

/// ||theta_{0,.}||_p + (sum_{k, j <= J} |M|^{j(s+1/2-1/p)q} ||upsilon_{k,j,.}||_p^q)^{1/q},
/// with sup in place of the sums when p or q is infinite. J defaults to the
/// finest stored level.
BesovNorm besov_seq_norm(const CoefficientSet& coeffs, const BesovParams& params, long long abs_det,
                         std::optional<int> truncation = std::nullopt);

/// s = r ln(zeta_min) / (d ln(zeta_max)); r/d for M = 2I.
double holder_embedding_s(double r, int d, const DilationMatrix& m);

struct RateExponents {
  double s_eff = 0.0;  // s' = s + min(1/p' - 1/p, 0)
  double eps = 0.0;    // s p - (p' - p)/2
  double alpha = 0.0;  // s/(2s+1) if eps >= 0, else s'/(2s+1-2/p)
};

/// The exponent formulas alone, without the estimation hypotheses.
RateExponents rate_exponents(double s, double p, double p_loss);

struct RateParams {
  double p_loss = 2.0;
  double s_eff = 0.0;
  double eps = 0.0;
  double alpha = 0.0;
  int j0 = 0;
  int j1 = 0;
  double K0 = 0.0;
  std::vector<double> lambda_bar;  // lambda_j for j = j0..j1-1

  double lambda(int j) const { return lambda_bar.at(static_cast<std::size_t>(j - j0)); }
};

/// Levels and thresholds of the hard-thresholding schedule:
/// |M|^{j0} <= |I|^{1-2 alpha}, |M|^{j1} <= |I|^{alpha/s'} (largest such
/// levels), K0^2 = p' ln|M| / (1 - 2 alpha), lambda_j = K0 sqrt(max(j,1)/|I|).
RateParams rate_params(const BesovParams& bp, double p_loss, std::size_t cardinality, const DilationMatrix& m);

/// Largest j >= 0 with |M|^j <= |I|^{1/(2s'+1)}.
int linear_level(double s_eff, std::size_t cardinality, long long abs_det);

/// offset + floor(ln|I| / (2 ln zeta_min + d ln zeta_max)).
int differentiable_level(std::size_t cardinality, int d, const DilationMatrix& m, int offset = 0);

/// floor(x) that treats values within 1e-9 below an integer as that integer.
int robust_floor(double x);

}  // namespace wde
