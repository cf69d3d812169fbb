#include "wde/densities.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "wde/normal.hpp"

namespace wde {

double ramp_pdf(std::span<const double> x) {
  const bool inside = x[0] >= 0.0 && x[0] <= 1.0 && x[1] >= 0.0 && x[1] <= 1.0;
  return inside ? 2.0 * x[0] : 0.0;
}

void ramp_from_uniforms(double u1, double u2, std::span<double> out) {
  out[0] = std::sqrt(u1);
  out[1] = u2;
}

Sample transform_to_ramp(const MultiField& field) {
  const std::size_t n = field.shape().cardinality();
  std::vector<double> coords(2 * n);
  for (std::size_t s = 0; s < n; ++s) {
    ramp_from_uniforms(normal_cdf(field.values[0][s]), normal_cdf(field.values[1][s]),
                       std::span<double>(coords.data() + 2 * s, 2));
  }
  return Sample(2, std::move(coords));
}

double target_l2_norm_sq(double rho) {
  // f = u/2 + g/2 with u the unit-square indicator and g the bivariate normal:
  // int f^2 = 1/4 + (1/2) P(N in [0,1]^2) + (1/4) int g^2.
  constexpr double sigma = 0.2;
  const double g_sq = 1.0 / (4.0 * std::numbers::pi * sigma * sigma * std::sqrt(1.0 - rho * rho));
  // P(N in [0,1]^2): outer quadrature in x_1 of the conditional probability in x_2.
  const double a = 0.5 / sigma;
  const double cond_sd = std::sqrt(1.0 - rho * rho);
  auto inner = [&](double z1) {
    const double m = rho * z1;
    return normal_pdf(z1) * (normal_cdf((a - m) / cond_sd) - normal_cdf((-a - m) / cond_sd));
  };
  const double box_mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(inner, -a, a);
  return 0.25 + 0.5 * box_mass + 0.25 * g_sq;
}

}  // namespace wde
